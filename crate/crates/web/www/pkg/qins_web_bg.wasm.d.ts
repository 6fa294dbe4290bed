/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_flowdemo_free: (a: number, b: number) => void;
export const divergence_vs_k: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const flowdemo_advance: (a: number, b: number) => [number, number];
export const flowdemo_divergence_l2: (a: number) => number;
export const flowdemo_energy: (a: number) => number;
export const flowdemo_field: (a: number, b: number, c: number) => [number, number, number, number];
export const flowdemo_n: (a: number) => number;
export const flowdemo_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const flowdemo_time: (a: number) => number;
export const galilean_gaps: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
