/** What-if panel: slider sweeps over the controllable inputs, curves of
 * predicted P vs slider value, deltas against the base heat. */

import type { PredictRequest, WhatIfEntry, WhatIfRequest } from "./api.js";
import { featureSpec } from "./features.js";

export interface CurvePoint {
    value: number;
    p_wtpct: number;
    delta_wtpct: number;
}

/** Evenly spaced probe values across the slider's historical range. */
export function sliderProbeValues(feature: string, steps = 9): number[] {
    const spec = featureSpec(feature);
    const step = (spec.max - spec.min) / (steps - 1);
    return Array.from({ length: steps }, (_, i) => spec.min + i * step);
}

export function buildWhatIfRequest(
    base: PredictRequest,
    feature: string,
    values: number[],
): WhatIfRequest {
    return {
        base,
        overrides: values.map((value) => ({ feature, value })),
    };
}

/** Pair the service's entries back with the probed values, in order. */
export function curveFromEntries(values: number[], entries: WhatIfEntry[]): CurvePoint[] {
    if (values.length !== entries.length) {
        throw new Error(`expected ${values.length} entries, got ${entries.length}`);
    }
    return entries.map((entry, i) => ({
        value: values[i],
        p_wtpct: entry.p_wtpct,
        delta_wtpct: entry.delta_wtpct,
    }));
}
