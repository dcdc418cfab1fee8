/** Trailing-edge debounce; bounds the request rate of slider drags. */

export const SLIDER_DEBOUNCE_MS = 150;

export function debounce<A extends unknown[]>(
    fn: (...args: A) => void,
    waitMs: number = SLIDER_DEBOUNCE_MS,
): (...args: A) => void {
    let timer: ReturnType<typeof setTimeout> | undefined;
    return (...args: A) => {
        if (timer !== undefined) {
            clearTimeout(timer);
        }
        timer = setTimeout(() => {
            timer = undefined;
            fn(...args);
        }, waitMs);
    };
}
