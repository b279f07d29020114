# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled stage-search kernel.

Same contract as `_scan_py` (see its docstring); the inner loop runs on
OpenSSL's SHA-256 without touching the interpreter, which is what makes
the 2^20-guess adversary budget affordable in the test suite.
"""

from libc.string cimport memcmp, memcpy


cdef extern from "openssl/evp.h" nogil:
    ctypedef struct EVP_MD_CTX
    ctypedef struct EVP_MD
    EVP_MD_CTX *EVP_MD_CTX_new()
    void EVP_MD_CTX_free(EVP_MD_CTX *ctx)
    const EVP_MD *EVP_sha256()
    int EVP_DigestInit_ex(EVP_MD_CTX *ctx, const EVP_MD *type, void *impl)
    int EVP_DigestUpdate(EVP_MD_CTX *ctx, const void *d, size_t cnt)
    int EVP_DigestFinal_ex(EVP_MD_CTX *ctx, unsigned char *md, unsigned int *s)


DEF HP_LEN = 32

ctypedef unsigned long long u64


cdef inline void _sha256(EVP_MD_CTX *ctx, const EVP_MD *alg,
                         const unsigned char *data, size_t n,
                         unsigned char *out) noexcept nogil:
    cdef unsigned int mdlen
    EVP_DigestInit_ex(ctx, alg, NULL)
    EVP_DigestUpdate(ctx, data, n)
    EVP_DigestFinal_ex(ctx, out, &mdlen)


cdef inline void _encode_counter(u64 counter, int nonce_len,
                                 unsigned char *out) noexcept nogil:
    cdef int i
    for i in range(nonce_len):
        out[nonce_len - 1 - i] = <unsigned char>((counter >> (8 * i)) & 0xFF)


cdef inline bint _counter_fits(u64 counter, int nonce_len) noexcept nogil:
    if nonce_len >= 8:
        return True
    return counter < (<u64>1 << (8 * nonce_len))


def scan_stage(bytes prev, bytes target, bytes hp_blob, int nonce_len,
               unsigned long long max_pairs, unsigned long long start_counter=0):
    """See `_scan_py.scan_stage`; bit-identical semantics."""
    cdef Py_ssize_t n_keys = len(hp_blob) // HP_LEN
    if n_keys == 0 or max_pairs == 0:
        return None
    if len(prev) != 32 or len(target) != 32 or nonce_len < 1 or nonce_len > 32:
        raise ValueError("bad scan arguments")

    cdef const unsigned char *prev_p = prev
    cdef const unsigned char *target_p = target
    cdef const unsigned char *hps = hp_blob
    cdef unsigned char nonce_buf[32]
    cdef unsigned char hn_hp[64]
    cdef unsigned char inner_prev[64]
    cdef unsigned char digest[32]
    cdef u64 counter = start_counter
    cdef u64 pairs = 0
    cdef Py_ssize_t k
    cdef long long found_counter = -1
    cdef Py_ssize_t found_key = -1

    cdef EVP_MD_CTX *ctx = EVP_MD_CTX_new()
    if ctx == NULL:
        raise MemoryError()
    cdef const EVP_MD *alg = EVP_sha256()

    memcpy(&inner_prev[32], prev_p, 32)
    with nogil:
        while _counter_fits(counter, nonce_len):
            _encode_counter(counter, nonce_len, nonce_buf)
            _sha256(ctx, alg, nonce_buf, nonce_len, &hn_hp[0])
            for k in range(n_keys):
                memcpy(&hn_hp[32], hps + k * HP_LEN, HP_LEN)
                _sha256(ctx, alg, hn_hp, 64, &inner_prev[0])
                _sha256(ctx, alg, inner_prev, 64, digest)
                if memcmp(digest, target_p, 32) == 0:
                    found_counter = <long long>counter
                    found_key = k
                    break
                pairs += 1
                if pairs >= max_pairs:
                    break
            if found_counter >= 0 or pairs >= max_pairs:
                break
            counter += 1
    EVP_MD_CTX_free(ctx)

    if found_counter >= 0:
        return found_counter, found_key
    return None


def count_matches(bytes prev, bytes target, bytes hp_blob, int nonce_len,
                  unsigned long long max_pairs):
    """See `_scan_py.count_matches`; bit-identical semantics."""
    cdef Py_ssize_t n_keys = len(hp_blob) // HP_LEN
    if n_keys == 0 or max_pairs == 0:
        return 0
    if len(prev) != 32 or len(target) != 32 or nonce_len < 1 or nonce_len > 32:
        raise ValueError("bad scan arguments")

    cdef const unsigned char *prev_p = prev
    cdef const unsigned char *target_p = target
    cdef const unsigned char *hps = hp_blob
    cdef unsigned char nonce_buf[32]
    cdef unsigned char hn_hp[64]
    cdef unsigned char inner_prev[64]
    cdef unsigned char digest[32]
    cdef u64 counter = 0
    cdef u64 pairs = 0
    cdef u64 found = 0
    cdef Py_ssize_t k
    cdef bint done = False

    cdef EVP_MD_CTX *ctx = EVP_MD_CTX_new()
    if ctx == NULL:
        raise MemoryError()
    cdef const EVP_MD *alg = EVP_sha256()

    memcpy(&inner_prev[32], prev_p, 32)
    with nogil:
        while not done and _counter_fits(counter, nonce_len):
            _encode_counter(counter, nonce_len, nonce_buf)
            _sha256(ctx, alg, nonce_buf, nonce_len, &hn_hp[0])
            for k in range(n_keys):
                memcpy(&hn_hp[32], hps + k * HP_LEN, HP_LEN)
                _sha256(ctx, alg, hn_hp, 64, &inner_prev[0])
                _sha256(ctx, alg, inner_prev, 64, digest)
                if memcmp(digest, target_p, 32) == 0:
                    found += 1
                pairs += 1
                if pairs >= max_pairs:
                    done = True
                    break
            counter += 1
    EVP_MD_CTX_free(ctx)
    return found
