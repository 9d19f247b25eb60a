/* @ts-self-types="./annealed_walk_wasm.d.ts" */

export class AnnealOutcome {
    static __wrap(ptr) {
        const obj = Object.create(AnnealOutcome.prototype);
        obj.__wbg_ptr = ptr;
        AnnealOutcomeFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        AnnealOutcomeFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_annealoutcome_free(ptr, 0);
    }
    /**
     * Stationary law at exponent `n`.
     * @returns {Float64Array}
     */
    get exact() {
        const ret = wasm.annealoutcome_exact(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Endpoint frequencies over `0..=n`.
     * @returns {Float64Array}
     */
    get histogram() {
        const ret = wasm.annealoutcome_histogram(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Total walk steps over all replicas.
     * @returns {number}
     */
    get steps() {
        const ret = wasm.annealoutcome_steps(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get tv() {
        const ret = wasm.annealoutcome_tv(this.__wbg_ptr);
        return ret;
    }
}
if (Symbol.dispose) AnnealOutcome.prototype[Symbol.dispose] = AnnealOutcome.prototype.free;

export class PathBounds {
    static __wrap(ptr) {
        const obj = Object.create(PathBounds.prototype);
        obj.__wbg_ptr = ptr;
        PathBoundsFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        PathBoundsFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_pathbounds_free(ptr, 0);
    }
    /**
     * Exponent used for the rows below (the dominance exponent).
     * @returns {number}
     */
    get exponent() {
        const ret = wasm.__wbg_get_pathbounds_exponent(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get hitting_bound() {
        const ret = wasm.__wbg_get_pathbounds_hitting_bound(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get hitting_exact() {
        const ret = wasm.__wbg_get_pathbounds_hitting_exact(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get k_dominance() {
        const ret = wasm.__wbg_get_pathbounds_k_dominance(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get k_exact() {
        const ret = wasm.__wbg_get_pathbounds_k_exact(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get k_sufficient() {
        const ret = wasm.__wbg_get_pathbounds_k_sufficient(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get mass_at_max() {
        const ret = wasm.__wbg_get_pathbounds_mass_at_max(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get run_length() {
        const ret = wasm.__wbg_get_pathbounds_run_length(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get steps() {
        const ret = wasm.__wbg_get_pathbounds_steps(this.__wbg_ptr);
        return ret;
    }
    /**
     * Exponent used for the rows below (the dominance exponent).
     * @param {number} arg0
     */
    set exponent(arg0) {
        wasm.__wbg_set_pathbounds_exponent(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set hitting_bound(arg0) {
        wasm.__wbg_set_pathbounds_hitting_bound(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set hitting_exact(arg0) {
        wasm.__wbg_set_pathbounds_hitting_exact(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set k_dominance(arg0) {
        wasm.__wbg_set_pathbounds_k_dominance(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set k_exact(arg0) {
        wasm.__wbg_set_pathbounds_k_exact(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set k_sufficient(arg0) {
        wasm.__wbg_set_pathbounds_k_sufficient(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set mass_at_max(arg0) {
        wasm.__wbg_set_pathbounds_mass_at_max(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set run_length(arg0) {
        wasm.__wbg_set_pathbounds_run_length(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set steps(arg0) {
        wasm.__wbg_set_pathbounds_steps(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) PathBounds.prototype[Symbol.dispose] = PathBounds.prototype.free;

/**
 * @param {number} alpha
 * @param {number} beta
 * @param {number} n
 * @param {number} k_max
 * @param {number} replicas
 * @param {number} seed
 * @returns {AnnealOutcome}
 */
export function anneal_histogram(alpha, beta, n, k_max, replicas, seed) {
    const ret = wasm.anneal_histogram(alpha, beta, n, k_max, replicas, seed);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return AnnealOutcome.__wrap(ret[0]);
}

/**
 * @param {Float64Array} f
 * @param {number} eps
 * @returns {PathBounds}
 */
export function graph_bounds(f, eps) {
    const ptr0 = passArrayF64ToWasm0(f, wasm.__wbindgen_malloc);
    const len0 = WASM_VECTOR_LEN;
    const ret = wasm.graph_bounds(ptr0, len0, eps);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return PathBounds.__wrap(ret[0]);
}

/**
 * @param {number} alpha
 * @param {number} beta
 * @param {number} n
 * @param {number} exponent
 * @returns {Float64Array}
 */
export function ising_landscape(alpha, beta, n, exponent) {
    const ret = wasm.ising_landscape(alpha, beta, n, exponent);
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./annealed_walk_wasm_bg.js": import0,
    };
}

const AnnealOutcomeFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_annealoutcome_free(ptr, 1));
const PathBoundsFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_pathbounds_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function passArrayF64ToWasm0(arg, malloc) {
    const ptr = malloc(arg.length * 8, 8) >>> 0;
    getFloat64ArrayMemory0().set(arg, ptr / 8);
    WASM_VECTOR_LEN = arg.length;
    return ptr;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let WASM_VECTOR_LEN = 0;

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('annealed_walk_wasm_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
