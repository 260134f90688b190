/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const loss_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const roc_pr: (a: number, b: number, c: number, d: number, e: bigint) => [number, number];
export const smote_playground: (a: number, b: number, c: number, d: number, e: bigint) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
