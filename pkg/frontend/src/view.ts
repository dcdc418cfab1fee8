/** Presentation of a prediction. Strictly formatting: p_ppm is displayed as
 * received from the service, never recomputed client-side. */

import type { PredictResponse } from "./api.js";

export const DEFAULT_SPEC_LIMIT_WTPCT = 0.015;

export interface PredictionView {
    p_wtpct: number;
    p_ppm: number;
    wtpctText: string;
    ppmText: string;
    specLimit: number;
    exceedsSpecLimit: boolean;
    outOfRange: string[];
}

export function renderPrediction(
    response: PredictResponse,
    specLimit: number = DEFAULT_SPEC_LIMIT_WTPCT,
): PredictionView {
    return {
        p_wtpct: response.p_wtpct,
        p_ppm: response.p_ppm,
        wtpctText: `${response.p_wtpct.toFixed(4)} wt%`,
        ppmText: `${response.p_ppm.toFixed(1)} ppm`,
        specLimit,
        exceedsSpecLimit: response.p_wtpct > specLimit,
        outOfRange: [...response.out_of_range],
    };
}

export function formatDelta(delta_wtpct: number): string {
    const sign = delta_wtpct >= 0 ? "+" : "";
    return `${sign}${delta_wtpct.toFixed(4)} wt%`;
}
