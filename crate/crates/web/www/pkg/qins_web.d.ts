/* tslint:disable */
/* eslint-disable */

export class FlowDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Takes `steps` steps at the stability bound.
     */
    advance(steps: number): void;
    divergence_l2(): number;
    /**
     * `e_kin + e_press`, the pressure part only for models with a bulk
     * modulus.
     */
    energy(): number;
    /**
     * Row-major samples of `|v|`, `∇·v` or `p` (`field`: `speed`,
     * `divergence`, `pressure`).
     */
    field(field: string): Float64Array;
    n(): number;
    /**
     * `model`: `temam`, `no_extra_force` or `incompressible`; `init`:
     * `taylor_green`, `perturbed_taylor_green`, `pulse` or `random`.
     */
    constructor(n: number, model: string, re: number, k: number, init: string, seed: number);
    time(): number;
}

export function divergence_vs_k(n: number, t_final: number, ks: Float64Array): Float64Array;

export function galilean_gaps(n: number, wx: number, wy: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_flowdemo_free: (a: number, b: number) => void;
    readonly divergence_vs_k: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly flowdemo_advance: (a: number, b: number) => [number, number];
    readonly flowdemo_divergence_l2: (a: number) => number;
    readonly flowdemo_energy: (a: number) => number;
    readonly flowdemo_field: (a: number, b: number, c: number) => [number, number, number, number];
    readonly flowdemo_n: (a: number) => number;
    readonly flowdemo_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly flowdemo_time: (a: number) => number;
    readonly galilean_gaps: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
