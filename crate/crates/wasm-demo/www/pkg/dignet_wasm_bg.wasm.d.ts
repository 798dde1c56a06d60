/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_net_free: (a: number, b: number) => void;
export const net_analysis_json: (a: number) => [number, number, number, number];
export const net_from_raw: (a: number, b: number) => [number, number, number];
export const net_gain_grid: (a: number, b: number, c: number) => [number, number, number, number];
export const net_interval_counts: (a: number, b: number, c: number, d: number) => [number, number];
export const net_m: (a: number) => number;
export const net_n: (a: number) => number;
export const net_points_2d: (a: number, b: number, c: number) => [number, number, number, number];
export const net_s: (a: number) => number;
export const net_scrambled_2d: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const net_shift_net: () => number;
export const net_sobol: (a: number, b: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
