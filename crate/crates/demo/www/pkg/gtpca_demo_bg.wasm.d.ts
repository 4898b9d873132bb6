/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_spikedemo_free: (a: number, b: number) => void;
export const glyph: (a: number) => [number, number];
export const rotate: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const rotationScores: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const spikedemo_alignmentCurve: (a: number, b: number, c: number) => [number, number, number, number];
export const spikedemo_component: (a: number, b: number) => [number, number, number, number];
export const spikedemo_count: (a: number) => number;
export const spikedemo_fit: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const spikedemo_hasSpike: (a: number, b: number) => [number, number, number];
export const spikedemo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const spikedemo_reconstruction: (a: number, b: number, c: number) => [number, number, number, number];
export const spikedemo_resmse: (a: number, b: number) => [number, number, number];
export const spikedemo_sample: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
