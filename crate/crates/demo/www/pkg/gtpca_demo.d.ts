/* tslint:disable */
/* eslint-disable */

export class SpikeDemo {
    free(): void;
    [Symbol.dispose](): void;
    alignmentCurve(i: number, k: number): Float64Array;
    component(k: number): Float64Array;
    count(): number;
    fit(components: number, epochs: number, batches: number, seed: number): Float64Array;
    hasSpike(i: number): boolean;
    constructor(seed: number, count: number, sample_len: number, weight_len: number);
    reconstruction(i: number, k: number): Float64Array;
    resmse(k: number): number;
    sample(i: number): Float64Array;
}

export function glyph(size: number): Float64Array;

export function rotate(pixels: Float64Array, size: number, angle: number): Float64Array;

export function rotationScores(image: Float64Array, template: Float64Array, size: number, steps: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_spikedemo_free: (a: number, b: number) => void;
    readonly glyph: (a: number) => [number, number];
    readonly rotate: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly rotationScores: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly spikedemo_alignmentCurve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly spikedemo_component: (a: number, b: number) => [number, number, number, number];
    readonly spikedemo_count: (a: number) => number;
    readonly spikedemo_fit: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly spikedemo_hasSpike: (a: number, b: number) => [number, number, number];
    readonly spikedemo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly spikedemo_reconstruction: (a: number, b: number, c: number) => [number, number, number, number];
    readonly spikedemo_resmse: (a: number, b: number) => [number, number, number];
    readonly spikedemo_sample: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
