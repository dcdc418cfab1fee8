/** DOM wiring for the operator console: heat form, prediction panel,
 * what-if sliders, and the sensitivity tornado. */

import { ApiClient, ServiceError, type PredictRequest } from "./api.js";
import { debounce } from "./debounce.js";
import { CONTROLLABLE_FEATURES, FEATURES, featureSpec } from "./features.js";
import {
    applyFieldErrors,
    emptyForm,
    isComplete,
    parseField,
    serializePredictRequest,
    type FormState,
} from "./form.js";
import { buildSensitivityRequest, tornadoFromEntries } from "./sensitivity.js";
import { SequenceGate } from "./staleness.js";
import { renderPrediction, formatDelta, DEFAULT_SPEC_LIMIT_WTPCT } from "./view.js";
import { buildWhatIfRequest, curveFromEntries, sliderProbeValues } from "./whatif.js";

interface ConsoleConfig {
    serviceUrl: string;
    specLimitWtpct: number;
}

async function loadConfig(): Promise<ConsoleConfig> {
    try {
        const response = await fetch("./config.json");
        const doc = await response.json();
        return {
            serviceUrl: doc.serviceUrl ?? "",
            specLimitWtpct: doc.specLimitWtpct ?? DEFAULT_SPEC_LIMIT_WTPCT,
        };
    } catch {
        return { serviceUrl: "", specLimitWtpct: DEFAULT_SPEC_LIMIT_WTPCT };
    }
}

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing element #${id}`);
    }
    return node as T;
}

function buildFormInputs(container: HTMLElement, onInput: (name: string, raw: string) => void): void {
    for (const spec of FEATURES) {
        const row = document.createElement("label");
        row.className = "field";
        row.innerHTML = `
            <span class="field-label">${spec.label} <small>(${spec.unit})</small></span>
            <input id="field-${spec.name}" type="text" inputmode="decimal"
                   placeholder="${spec.min} .. ${spec.max}" />
            <span class="field-note" id="note-${spec.name}"></span>`;
        container.appendChild(row);
        const input = row.querySelector("input") as HTMLInputElement;
        input.addEventListener("input", () => onInput(spec.name, input.value));
    }
}

function refreshFieldNotes(form: FormState): void {
    for (const spec of FEATURES) {
        const state = form[spec.name];
        const note = el<HTMLSpanElement>(`note-${spec.name}`);
        const input = el<HTMLInputElement>(`field-${spec.name}`);
        input.classList.toggle("invalid", state.error !== null && state.raw.trim() !== "");
        input.classList.toggle("warning", state.outOfHint);
        if (state.error && state.raw.trim() !== "") {
            note.textContent = state.error;
        } else if (state.outOfHint) {
            note.textContent = "outside historical range";
        } else {
            note.textContent = "";
        }
    }
}

async function start(): Promise<void> {
    const config = await loadConfig();
    const api = new ApiClient(config.serviceUrl);
    let form = emptyForm();
    let base: PredictRequest | null = null;
    const predictGate = new SequenceGate();
    const whatIfGate = new SequenceGate();
    const banner = el<HTMLDivElement>("banner");
    const submit = el<HTMLButtonElement>("predict-button");

    const setBanner = (text: string) => {
        banner.textContent = text;
        banner.hidden = text === "";
    };

    const updateForm = (name: string, raw: string) => {
        form = { ...form, [name]: parseField(name, raw) };
        refreshFieldNotes(form);
        submit.disabled = !isComplete(form);
    };

    buildFormInputs(el("form-fields"), updateForm);
    submit.disabled = true;

    const showPrediction = async () => {
        const ticket = predictGate.next();
        setBanner("");
        try {
            const request = serializePredictRequest(form);
            const response = await api.predict(request);
            if (!predictGate.accept(ticket)) {
                return; // superseded by a newer submission
            }
            base = request;
            const view = renderPrediction(response, config.specLimitWtpct);
            el("prediction-wtpct").textContent = view.wtpctText;
            el("prediction-ppm").textContent = view.ppmText;
            el("prediction-band").textContent = view.exceedsSpecLimit
                ? `above the ${view.specLimit} wt% spec limit`
                : `within the ${view.specLimit} wt% spec limit`;
            el("prediction-oor").textContent = view.outOfRange.length
                ? `outside fitted range: ${view.outOfRange.join(", ")}`
                : "";
            await Promise.all([refreshSliders(), refreshTornado()]);
        } catch (err) {
            if (err instanceof ServiceError) {
                form = applyFieldErrors(form, err.errors);
                refreshFieldNotes(form);
                setBanner(`service rejected the request (${err.status}): ${err.message}`);
            } else {
                setBanner(`service unreachable: ${err}`);
            }
        }
    };
    submit.addEventListener("click", showPrediction);

    const refreshSliders = async () => {
        if (!base) {
            return;
        }
        for (const feature of CONTROLLABLE_FEATURES) {
            const probes = sliderProbeValues(feature);
            const entries = await api.whatIf(buildWhatIfRequest(base, feature, probes));
            const curve = curveFromEntries(probes, entries);
            const list = el(`curve-${feature}`);
            list.innerHTML = "";
            for (const point of curve) {
                const item = document.createElement("li");
                item.textContent =
                    `${point.value.toFixed(1)} ${featureSpec(feature).unit}: ` +
                    `${point.p_wtpct.toFixed(4)} wt% (${formatDelta(point.delta_wtpct)})`;
                list.appendChild(item);
            }
        }
    };

    const refreshTornado = async () => {
        if (!base) {
            return;
        }
        const ticket = whatIfGate.next();
        const entries = await api.whatIf(buildSensitivityRequest(base));
        if (!whatIfGate.accept(ticket)) {
            return;
        }
        const bars = tornadoFromEntries(entries);
        const list = el("tornado");
        list.innerHTML = "";
        for (const bar of bars) {
            const item = document.createElement("li");
            item.textContent =
                `${bar.label}: -1sd ${formatDelta(bar.deltaMinus)}, +1sd ${formatDelta(bar.deltaPlus)}`;
            list.appendChild(item);
        }
    };

    for (const feature of CONTROLLABLE_FEATURES) {
        const slider = el<HTMLInputElement>(`slider-${feature}`);
        const spec = featureSpec(feature);
        slider.min = String(spec.min);
        slider.max = String(spec.max);
        slider.step = String((spec.max - spec.min) / 100);
        slider.value = String(spec.mean);
        const readout = el(`slider-${feature}-value`);
        readout.textContent = `${spec.mean} ${spec.unit}`;
        const probe = debounce(async (value: number) => {
            if (!base) {
                return;
            }
            const ticket = whatIfGate.next();
            const entries = await api.whatIf(
                buildWhatIfRequest(base, feature, [value]),
            );
            if (!whatIfGate.accept(ticket)) {
                return; // last write wins
            }
            readout.textContent =
                `${value} ${spec.unit} -> ${entries[0].p_wtpct.toFixed(4)} wt% ` +
                `(${formatDelta(entries[0].delta_wtpct)})`;
        });
        slider.addEventListener("input", () => probe(Number(slider.value)));
    }
}

start();
