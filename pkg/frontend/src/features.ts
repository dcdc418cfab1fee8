/**
 * The 12 heat features in the service's canonical order, with display
 * metadata and the plant summary statistics used for range hints and
 * one-standard-deviation sensitivity probes.
 */

export interface FeatureSpec {
    name: string;
    label: string;
    unit: string;
    min: number;
    max: number;
    mean: number;
    std: number;
}

export const FEATURES: readonly FeatureSpec[] = [
    { name: "scrap_weight", label: "Scrap weight", unit: "kg", min: 41340, max: 43708, mean: 42673, std: 783 },
    { name: "c_scrap", label: "C content in scrap", unit: "wt%", min: 0.058, max: 0.345, mean: 0.2747, std: 0.0489 },
    { name: "mn_scrap", label: "Mn content in scrap", unit: "wt%", min: 0.577, max: 3.58, mean: 0.798, std: 0.0992 },
    { name: "cr_scrap", label: "Cr content in scrap", unit: "wt%", min: 0.112, max: 1.878, mean: 0.7456, std: 0.2646 },
    { name: "si_scrap", label: "Si content in scrap", unit: "wt%", min: 0.128, max: 0.79, mean: 0.2345, std: 0.0362 },
    { name: "s_scrap", label: "S content in scrap", unit: "wt%", min: 0.004, max: 0.08, mean: 0.0127, std: 0.0033 },
    { name: "injected_oxygen", label: "Injected oxygen", unit: "m3", min: 77.87175, max: 289.96608, mean: 179.0483, std: 29.95939 },
    { name: "injected_lime", label: "Injected lime", unit: "kg", min: 975.224, max: 1950.447, mean: 1047.79838, std: 256.279689 },
    { name: "energy", label: "Energy consumption", unit: "kWh", min: 18008, max: 23398, mean: 20702, std: 941 },
    { name: "deslag_temp", label: "Deslagging temperature", unit: "degC", min: 1518, max: 1682, mean: 1600, std: 55 },
    { name: "tap_temp", label: "Tapping temperature", unit: "degC", min: 1609, max: 1696, mean: 1652, std: 27 },
    { name: "duration", label: "Process duration", unit: "min", min: 98, max: 1355, mean: 147, std: 53 },
] as const;

export const FEATURE_NAMES: readonly string[] = FEATURES.map((f) => f.name);

/** Sliders offered in the what-if panel: the operator-controllable inputs. */
export const CONTROLLABLE_FEATURES = ["injected_oxygen", "injected_lime", "duration"] as const;

export function featureSpec(name: string): FeatureSpec {
    const spec = FEATURES.find((f) => f.name === name);
    if (!spec) {
        throw new Error(`unknown feature: ${name}`);
    }
    return spec;
}
