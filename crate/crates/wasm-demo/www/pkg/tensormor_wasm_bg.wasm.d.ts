/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_romdemo_free: (a: number, b: number) => void;
export const reduction_errors: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const romdemo_dimension: (a: number) => number;
export const romdemo_lower: (a: number) => [number, number];
export const romdemo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const romdemo_solve: (a: number, b: number, c: number) => [number, number, number, number];
export const romdemo_upper: (a: number) => [number, number];
export const tt_ranks: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
