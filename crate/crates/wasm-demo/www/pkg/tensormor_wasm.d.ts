/* tslint:disable */
/* eslint-disable */

/**
 * A minimal-residual reduced model built once; `solve` is the online stage.
 */
export class RomDemo {
    free(): void;
    [Symbol.dispose](): void;
    dimension(): number;
    lower(): Float64Array;
    constructor(grid: number, d: number, m: number, seed: bigint);
    /**
     * Reduced and full solutions at `xi` with the error, the best
     * approximation error and the residual norm.
     */
    solve(xi: Float64Array): string;
    upper(): Float64Array;
}

/**
 * POD (mean-square) and strong greedy (worst-case) errors up to dimension
 * `m` on `k` diffusion snapshots.
 */
export function reduction_errors(grid: number, d: number, k: number, m: number, seed: bigint): string;

/**
 * TT-SVD of `name` (`additive`, `rank-one` or `multiquadric`) sampled on
 * `points^d` grid points of [-1, 1]^d.
 */
export function tt_ranks(name: string, d: number, points: number, tol: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_romdemo_free: (a: number, b: number) => void;
    readonly reduction_errors: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly romdemo_dimension: (a: number) => number;
    readonly romdemo_lower: (a: number) => [number, number];
    readonly romdemo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly romdemo_solve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly romdemo_upper: (a: number) => [number, number];
    readonly tt_ranks: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
