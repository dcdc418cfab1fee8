/** Typed client for the prediction service. All numbers displayed anywhere
 * in the console originate from these responses. */

export interface PredictRequest {
    features: Record<string, number>;
}

export interface PredictResponse {
    p_wtpct: number;
    p_ppm: number;
    out_of_range: string[];
}

export interface Override {
    feature: string;
    value: number;
}

export interface WhatIfRequest {
    base: PredictRequest;
    overrides: Override[];
}

export interface WhatIfEntry {
    applied_override: Override | null;
    p_wtpct: number;
    delta_wtpct: number;
}

export interface FieldError {
    field: string;
    message: string;
}

export class ServiceError extends Error {
    constructor(
        public readonly status: number,
        public readonly errors: FieldError[],
        message: string,
    ) {
        super(message);
    }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
    constructor(
        private readonly baseUrl: string,
        private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    ) {}

    private async post<T>(path: string, body: unknown): Promise<T> {
        const response = await this.fetchFn(`${this.baseUrl}${path}`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!response.ok) {
            let errors: FieldError[] = [];
            let detail = `${response.status}`;
            try {
                const doc = await response.json();
                errors = doc.errors ?? [];
                detail = doc.detail ?? detail;
            } catch {
                // non-JSON error body; keep the status text
            }
            throw new ServiceError(response.status, errors, detail);
        }
        return (await response.json()) as T;
    }

    predict(request: PredictRequest): Promise<PredictResponse> {
        return this.post<PredictResponse>("/v1/predict", request);
    }

    whatIf(request: WhatIfRequest): Promise<WhatIfEntry[]> {
        return this.post<WhatIfEntry[]>("/v1/whatif", request);
    }
}
