/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_annealoutcome_free: (a: number, b: number) => void;
export const __wbg_get_pathbounds_exponent: (a: number) => number;
export const __wbg_get_pathbounds_hitting_bound: (a: number) => number;
export const __wbg_get_pathbounds_hitting_exact: (a: number) => number;
export const __wbg_get_pathbounds_k_dominance: (a: number) => number;
export const __wbg_get_pathbounds_k_exact: (a: number) => number;
export const __wbg_get_pathbounds_k_sufficient: (a: number) => number;
export const __wbg_get_pathbounds_mass_at_max: (a: number) => number;
export const __wbg_get_pathbounds_run_length: (a: number) => number;
export const __wbg_get_pathbounds_steps: (a: number) => number;
export const __wbg_pathbounds_free: (a: number, b: number) => void;
export const __wbg_set_pathbounds_exponent: (a: number, b: number) => void;
export const __wbg_set_pathbounds_hitting_bound: (a: number, b: number) => void;
export const __wbg_set_pathbounds_hitting_exact: (a: number, b: number) => void;
export const __wbg_set_pathbounds_k_dominance: (a: number, b: number) => void;
export const __wbg_set_pathbounds_k_exact: (a: number, b: number) => void;
export const __wbg_set_pathbounds_k_sufficient: (a: number, b: number) => void;
export const __wbg_set_pathbounds_mass_at_max: (a: number, b: number) => void;
export const __wbg_set_pathbounds_run_length: (a: number, b: number) => void;
export const __wbg_set_pathbounds_steps: (a: number, b: number) => void;
export const anneal_histogram: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const annealoutcome_exact: (a: number) => [number, number];
export const annealoutcome_histogram: (a: number) => [number, number];
export const annealoutcome_steps: (a: number) => number;
export const annealoutcome_tv: (a: number) => number;
export const graph_bounds: (a: number, b: number, c: number) => [number, number, number];
export const ising_landscape: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
