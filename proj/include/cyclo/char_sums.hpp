#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cyclo/number_core.hpp"

namespace cyclo {

// ---------------------------------------------------------------------------
// Conventions used throughout:
//   * chi is normalized by chi(g) = xi_{p^k} with g the least generator of
//     (Z/qZ)^*; chi(x) = 0 when q | x.
//   * Gauss and Jacobi sums carry Lang's sign:  tau(chi) = -sum chi(x) rho^x,
//     j(chi,chi') = -sum chi(x) chi'(1-x).
//   * Root-of-unity compatibility: xi_{p^l} = xi_{p^k}^{p^(k-l)} for l <= k.
// ---------------------------------------------------------------------------

// A pair (p^k, q) with p^k exactly dividing q - 1, p != q, both prime.
struct CharPair {
    unsigned long p = 2;
    unsigned k = 1;
    unsigned long q = 3;
    unsigned long pk() const;
    auto operator<=>(const CharPair&) const = default;
};
bool char_pair_valid(const CharPair& pair);

struct Character {
    CharPair pair;
    unsigned long g = 0;          // least generator of (Z/qZ)^*
    std::vector<uint32_t> dlog;   // dlog[x] = y with g^y = x mod q, x in [1, q)

    unsigned long pk() const { return pair.pk(); }
    unsigned long q() const { return pair.q; }
    // chi(x) as an exponent of xi_{p^k}; x must be coprime to q.
    unsigned long exponent_of(const Int& x) const;
};
// Builds the dlog table; q must not exceed table_bound (the direct method
// stores q entries).
Character build_character(const CharPair& pair, unsigned long table_bound = 1ul << 26);

// Exact element of Z[xi_m], m = p^k, on the basis 1, xi, ..., xi^(phi(m)-1).
struct CycloInt {
    unsigned long p = 2;
    unsigned k = 1;
    unsigned long m = 2;       // p^k
    std::vector<Int> c;        // size phi(m)
    bool operator==(const CycloInt&) const = default;

    bool is_scalar() const;
    const Int& scalar() const { return c[0]; }
};

CycloInt ci_scalar(unsigned long p, unsigned k, const Int& v);
CycloInt ci_root_power(unsigned long p, unsigned k, unsigned long e);  // xi^e
CycloInt ci_add(const CycloInt& a, const CycloInt& b);
CycloInt ci_sub(const CycloInt& a, const CycloInt& b);
CycloInt ci_neg(const CycloInt& a);
CycloInt ci_mul(const CycloInt& a, const CycloInt& b);
CycloInt ci_mul_scalar(const CycloInt& a, const Int& s);
// Galois map xi -> xi^e, gcd(e, p) = 1.
CycloInt ci_galois(const CycloInt& a, unsigned long e);
CycloInt ci_conj(const CycloInt& a);

// j(chi, chi^a) for 1 <= a < p^k, by direct summation over the dlog table.
CycloInt jacobi_sum(const Character& chi, unsigned long a);

// Multiple Jacobi sum J_nu(chi), 1 <= nu <= f = p^k:
//   J_1 = 1,  J_{nu+1} = J_nu * j(chi, chi^nu) (nu <= f-2),  J_f = chi(-1) q J_{f-1}.
// jfetch, when given, supplies j(chi, chi^a); otherwise sums are computed.
CycloInt multiple_jacobi(const Character& chi, unsigned long nu);
CycloInt multiple_jacobi_from(const CharPair& pair, unsigned long nu,
                              const std::function<CycloInt(unsigned long)>& jfetch);

struct CertifyResult {
    bool accepted = false;
    std::string reason;  // "norm" | "congruence" | "stickelberger" | "degenerate" | ""
};
// Deterministic check that alpha = j(chi, chi^a) for some character of
// conductor q and order p^k: norm alpha * conj(alpha) = q, congruence
// alpha = 1 mod (1 - xi)^2, and Stickelberger divisibility of some Galois
// conjugate of (xi - c)^theta by alpha. Needs no dlog table.
CertifyResult certify_jacobi_sum(const CycloInt& alpha, const CharPair& pair, unsigned long a);

// ---------------------------------------------------------------------------
// Persistent Jacobi-sum tables
// ---------------------------------------------------------------------------

struct JacobiKey {
    unsigned long p = 0;
    unsigned k = 0;
    unsigned long q = 0;
    unsigned long a = 0;
    auto operator<=>(const JacobiKey&) const = default;
};
struct JacobiEntry {
    CycloInt value;
    bool certified = false;
};

class JacobiTable {
public:
    std::map<JacobiKey, JacobiEntry> entries;

    // Cached j(chi, chi^a); computes, certifies and stores on miss.
    const CycloInt& sum(const Character& chi, unsigned long a);
    bool has(const JacobiKey& k) const { return entries.count(k) > 0; }
};

// UTF-8 text format: line 1 "cppjac 1"; entry lines
// "J <p> <k> <q> <a> : <coeff...>" (signed decimal, ascending xi powers);
// final line "sha256 <hex of all preceding bytes>".
std::string table_serialize(const JacobiTable& t);
void table_save(const JacobiTable& t, const std::string& path);
// Throws std::runtime_error on format/checksum violations. When recertify is
// set, every entry is re-checked and its certified flag updated; a failed
// entry throws unless collect_rejects is non-null (rejects listed there).
JacobiTable table_parse(const std::string& text, bool recertify,
                        std::vector<JacobiKey>* collect_rejects = nullptr);
JacobiTable table_load(const std::string& path, bool recertify,
                       std::vector<JacobiKey>* collect_rejects = nullptr);

// ---------------------------------------------------------------------------
// Exact character-sum oracles (test scale). Elements of Z[xi_M][Y]/(Phi_q(Y))
// with 128-bit coefficients; scale-guarded to q <= 256, M <= 64.
// ---------------------------------------------------------------------------

struct BivarCyclo {
    unsigned long q = 0;                  // rho conductor (prime)
    unsigned long m = 1;                  // xi conductor
    std::vector<std::vector<__int128>> c; // c[y][i]: rho^y xi^i, y < q-1, i < phi(m)
    bool operator==(const BivarCyclo&) const = default;
};

BivarCyclo bivar_scalar(unsigned long q, unsigned long m, long long v);
BivarCyclo bivar_mul(const BivarCyclo& a, const BivarCyclo& b);
BivarCyclo bivar_pow(const BivarCyclo& a, unsigned long e);
BivarCyclo bivar_embed(const CycloInt& a, unsigned long q);  // xi-part only
// All coefficients congruent mod r.
bool bivar_eq_mod(const BivarCyclo& a, const BivarCyclo& b, unsigned long r);

// tau(chi^e) with rho = Y, values in Z[xi_{p^k}].
BivarCyclo gauss_sum_exact(const Character& chi, unsigned long e = 1);
// tau of x -> xi_M^(cmult * dlog(x)) for M | q-1 (general-order oracle).
BivarCyclo gauss_sum_oracle(const Character& chi, unsigned long M, unsigned long cmult);

// The f = (q-1)/ord_q(nu) Gauss periods eta_h(rho, nu), h running over the
// cosets g^j <nu>, j = 0..f-1, each with xi conductor m_inner.
std::vector<BivarCyclo> gauss_periods(unsigned long q, unsigned long nu, unsigned long m_inner = 1);

}  // namespace cyclo
