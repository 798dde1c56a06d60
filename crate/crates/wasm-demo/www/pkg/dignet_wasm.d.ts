/* tslint:disable */
/* eslint-disable */

export class Net {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Quality parameters and maximal gain as JSON. The `A_K` table is left
     * empty when enumerating it would stall the page.
     */
    analysis_json(): string;
    /**
     * Parses the RAW text format.
     */
    static from_raw(text: string): Net;
    /**
     * `log2 Γ_{u,k}` for `u = {a, b}` and `k_a, k_b ∈ 0..=m+1`, row-major in
     * `k_a`; `-1` marks a zero gain. With `a == b` the single-coordinate
     * gains fill the diagonal.
     */
    gain_grid(a: number, b: number): Int32Array;
    /**
     * Points in each cell of the `2^ka × 2^kb` grid on coordinates `a`, `b`,
     * row-major with `a` along rows. Takes the interleaved output of
     * `points_2d` or `scrambled_2d`. Depths are capped at 12.
     */
    static interval_counts(xy: Float64Array, ka: number, kb: number): Uint32Array;
    m(): number;
    n(): number;
    /**
     * Coordinates `a` and `b` (0-based) of every point, interleaved `x0, y0, x1, ...`.
     */
    points_2d(a: number, b: number): Float64Array;
    s(): number;
    /**
     * Like [`points_2d`](Self::points_2d) after one scramble.
     */
    scrambled_2d(a: number, b: number, kind: string, seed: number): Float64Array;
    static shift_net(): Net;
    /**
     * The first `dims` Sobol' coordinates at `m` bits.
     */
    static sobol(dims: number, m: number): Net;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_net_free: (a: number, b: number) => void;
    readonly net_analysis_json: (a: number) => [number, number, number, number];
    readonly net_from_raw: (a: number, b: number) => [number, number, number];
    readonly net_gain_grid: (a: number, b: number, c: number) => [number, number, number, number];
    readonly net_interval_counts: (a: number, b: number, c: number, d: number) => [number, number];
    readonly net_m: (a: number) => number;
    readonly net_n: (a: number) => number;
    readonly net_points_2d: (a: number, b: number, c: number) => [number, number, number, number];
    readonly net_s: (a: number) => number;
    readonly net_scrambled_2d: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly net_shift_net: () => number;
    readonly net_sobol: (a: number, b: number) => [number, number, number];
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
