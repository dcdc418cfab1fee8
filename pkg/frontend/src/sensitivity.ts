/** Tornado view: each feature probed at base +/- one standard deviation via
 * /v1/whatif; bars ranked by the larger absolute predicted delta. */

import type { PredictRequest, WhatIfEntry, WhatIfRequest } from "./api.js";
import { FEATURES } from "./features.js";

export interface TornadoBar {
    feature: string;
    label: string;
    deltaMinus: number;
    deltaPlus: number;
    magnitude: number;
}

/** One request carrying 24 overrides: (-1 std, +1 std) per feature, in
 * feature order. The response entries come back in the same order. */
export function buildSensitivityRequest(base: PredictRequest): WhatIfRequest {
    const overrides = FEATURES.flatMap((spec) => {
        const current = base.features[spec.name];
        return [
            { feature: spec.name, value: current - spec.std },
            { feature: spec.name, value: current + spec.std },
        ];
    });
    return { base, overrides };
}

export function tornadoFromEntries(entries: WhatIfEntry[]): TornadoBar[] {
    if (entries.length !== FEATURES.length * 2) {
        throw new Error(`expected ${FEATURES.length * 2} entries, got ${entries.length}`);
    }
    const bars = FEATURES.map((spec, i) => {
        const minus = entries[2 * i];
        const plus = entries[2 * i + 1];
        return {
            feature: spec.name,
            label: spec.label,
            deltaMinus: minus.delta_wtpct,
            deltaPlus: plus.delta_wtpct,
            magnitude: Math.max(Math.abs(minus.delta_wtpct), Math.abs(plus.delta_wtpct)),
        };
    });
    bars.sort((a, b) => b.magnitude - a.magnitude);
    return bars;
}
