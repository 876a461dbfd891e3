#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyclo {

using Int = mpz_class;

inline Int pow_mod(const Int& base, const Int& exp, const Int& mod) {
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return r;
}

inline Int pow_ui(const Int& base, unsigned long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Int gcd(const Int& a, const Int& b) {
    Int r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Int lcm(const Int& a, const Int& b) {
    Int r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

// Least nonnegative residue of a mod m (m > 0).
inline Int mod(const Int& a, const Int& m) {
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline Int isqrt(const Int& a) {
    Int r;
    mpz_sqrt(r.get_mpz_t(), a.get_mpz_t());
    return r;
}

inline Int from_decimal_or_hex(const std::string& s) {
    Int v;
    int rc;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
        rc = mpz_set_str(v.get_mpz_t(), s.c_str() + 2, 16);
    else
        rc = mpz_set_str(v.get_mpz_t(), s.c_str(), 10);
    if (rc != 0) throw std::invalid_argument("bad integer literal: " + s);
    return v;
}

inline std::string to_hex(const Int& v) {
    char* raw = mpz_get_str(nullptr, 16, v.get_mpz_t());
    std::string s(raw);
    void (*freefn)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(raw, s.size() + 1);
    return s;
}

inline Int from_hex(const std::string& s) {
    Int v;
    if (mpz_set_str(v.get_mpz_t(), s.c_str(), 16) != 0)
        throw std::invalid_argument("bad hex integer: " + s);
    return v;
}

// Deterministic seedable stream over GMP's Mersenne Twister.
class Rng {
public:
    explicit Rng(uint64_t seed) { gmp_randinit_mt(state_); gmp_randseed_ui(state_, seed); }
    Rng(const Rng&) = delete;
    Rng& operator=(const Rng&) = delete;
    ~Rng() { gmp_randclear(state_); }

    // Uniform in [0, bound).
    Int below(const Int& bound) {
        Int r;
        mpz_urandomm(r.get_mpz_t(), state_, bound.get_mpz_t());
        return r;
    }
    uint64_t u64() { return gmp_urandomb_ui(state_, 32) | (uint64_t(gmp_urandomb_ui(state_, 32)) << 32); }

private:
    gmp_randstate_t state_;
};

}  // namespace cyclo
