/* tslint:disable */
/* eslint-disable */

/**
 * Single-sample loss and gradient as functions of the predicted probability.
 */
export function loss_curves(label: number, gamma: number, alpha: number, beta: number, steps: number): string;

/**
 * ROC and PR curves for scores `sigmoid(z + separation * label)`.
 */
export function roc_pr(separation: number, n: number, prevalence: number, threshold: number, seed: bigint): string;

/**
 * Two Gaussian blobs in the plane, oversampled with SMOTE.
 */
export function smote_playground(n_majority: number, n_minority: number, k: number, target_ratio: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly loss_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly roc_pr: (a: number, b: number, c: number, d: number, e: bigint) => [number, number];
    readonly smote_playground: (a: number, b: number, c: number, d: number, e: bigint) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
