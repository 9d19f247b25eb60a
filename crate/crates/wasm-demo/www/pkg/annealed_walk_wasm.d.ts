/* tslint:disable */
/* eslint-disable */

export class AnnealOutcome {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Stationary law at exponent `n`.
     */
    readonly exact: Float64Array;
    /**
     * Endpoint frequencies over `0..=n`.
     */
    readonly histogram: Float64Array;
    /**
     * Total walk steps over all replicas.
     */
    readonly steps: number;
    readonly tv: number;
}

export class PathBounds {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Exponent used for the rows below (the dominance exponent).
     */
    exponent: number;
    hitting_bound: number;
    hitting_exact: number;
    k_dominance: number;
    k_exact: number;
    k_sufficient: number;
    mass_at_max: number;
    run_length: number;
    steps: number;
}

export function anneal_histogram(alpha: number, beta: number, n: number, k_max: number, replicas: number, seed: number): AnnealOutcome;

export function graph_bounds(f: Float64Array, eps: number): PathBounds;

export function ising_landscape(alpha: number, beta: number, n: number, exponent: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_annealoutcome_free: (a: number, b: number) => void;
    readonly __wbg_get_pathbounds_exponent: (a: number) => number;
    readonly __wbg_get_pathbounds_hitting_bound: (a: number) => number;
    readonly __wbg_get_pathbounds_hitting_exact: (a: number) => number;
    readonly __wbg_get_pathbounds_k_dominance: (a: number) => number;
    readonly __wbg_get_pathbounds_k_exact: (a: number) => number;
    readonly __wbg_get_pathbounds_k_sufficient: (a: number) => number;
    readonly __wbg_get_pathbounds_mass_at_max: (a: number) => number;
    readonly __wbg_get_pathbounds_run_length: (a: number) => number;
    readonly __wbg_get_pathbounds_steps: (a: number) => number;
    readonly __wbg_pathbounds_free: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_exponent: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_hitting_bound: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_hitting_exact: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_k_dominance: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_k_exact: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_k_sufficient: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_mass_at_max: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_run_length: (a: number, b: number) => void;
    readonly __wbg_set_pathbounds_steps: (a: number, b: number) => void;
    readonly anneal_histogram: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly annealoutcome_exact: (a: number) => [number, number];
    readonly annealoutcome_histogram: (a: number) => [number, number];
    readonly annealoutcome_steps: (a: number) => number;
    readonly annealoutcome_tv: (a: number) => number;
    readonly graph_bounds: (a: number, b: number, c: number) => [number, number, number];
    readonly ising_landscape: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
