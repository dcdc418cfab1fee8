/** Heat form state: raw text per feature, parsed values, validity, range hints. */

import type { PredictRequest } from "./api.js";
import { FEATURES, featureSpec } from "./features.js";

export interface FieldState {
    raw: string;
    value: number | null;
    /** Parse failure message; null when the field holds a finite number. */
    error: string | null;
    /** True when the value lies outside the historical [min, max] hint.
     * A warning only, never a blocker: live heats can exceed history. */
    outOfHint: boolean;
}

export type FormState = Record<string, FieldState>;

export function parseField(name: string, raw: string): FieldState {
    const trimmed = raw.trim();
    if (trimmed === "") {
        return { raw, value: null, error: "required", outOfHint: false };
    }
    const value = Number(trimmed);
    if (!Number.isFinite(value)) {
        return { raw, value: null, error: "not a number", outOfHint: false };
    }
    const spec = featureSpec(name);
    return { raw, value, error: null, outOfHint: value < spec.min || value > spec.max };
}

export function emptyForm(): FormState {
    const state: FormState = {};
    for (const spec of FEATURES) {
        state[spec.name] = parseField(spec.name, "");
    }
    return state;
}

export function formFromValues(values: Record<string, number>): FormState {
    const state: FormState = {};
    for (const spec of FEATURES) {
        const v = values[spec.name];
        state[spec.name] = parseField(spec.name, v === undefined ? "" : String(v));
    }
    return state;
}

/** Submit is allowed only when every one of the 12 fields parses. */
export function isComplete(form: FormState): boolean {
    return FEATURES.every((spec) => form[spec.name]?.error === null);
}

/** Serialize the form into the exact /v1/predict request body. */
export function serializePredictRequest(form: FormState): PredictRequest {
    if (!isComplete(form)) {
        throw new Error("form is incomplete");
    }
    const features: Record<string, number> = {};
    for (const spec of FEATURES) {
        features[spec.name] = form[spec.name].value as number;
    }
    return { features };
}

/** Apply a service-side field error back onto the form (400/422 bodies). */
export function applyFieldErrors(
    form: FormState,
    errors: { field: string; message: string }[],
): FormState {
    const next = { ...form };
    for (const err of errors) {
        const key = err.field.replace(/^features\./, "");
        if (next[key]) {
            next[key] = { ...next[key], error: err.message };
        }
    }
    return next;
}
