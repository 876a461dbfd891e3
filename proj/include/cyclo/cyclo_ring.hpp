#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cyclo/number_core.hpp"

namespace cyclo {

// Phi_m(X) with exact integer coefficients, ascending. Cached.
std::vector<Int> cyclotomic_poly(unsigned long m);

// Quotient ring (Z/nZ)[Y]/(h(Y)). m > 0 labels h = Phi_m mod n; m = 0 is a
// custom monic polynomial. Immutable after construction.
class CycloRing;
using RingPtr = std::shared_ptr<const CycloRing>;

class CycloRing {
public:
    Int n;
    unsigned long m = 0;
    std::vector<Int> h;  // monic, ascending, size d+1, coefficients in [0,n)
    size_t d = 1;

    static RingPtr conductor(const Int& n, unsigned long m);
    static RingPtr custom(const Int& n, std::vector<Int> h_monic);
    bool same_as(const CycloRing& o) const { return n == o.n && h == o.h; }
};

struct CycloElem {
    RingPtr ring;
    std::vector<Int> c;  // size ring->d, ascending degree, entries in [0,n)

    bool is_zero() const;
    bool is_constant() const;  // degree-0 (all higher coefficients zero)
    bool operator==(const CycloElem& o) const { return c == o.c; }
};

CycloElem elem_scalar(const RingPtr& r, const Int& v);
CycloElem elem_zero(const RingPtr& r);
CycloElem elem_one(const RingPtr& r);
// Element from an arbitrary coefficient list (reduced mod h and n).
CycloElem elem_from_coeffs(const RingPtr& r, const std::vector<Int>& coeffs);
CycloElem elem_monomial(const RingPtr& r, unsigned long deg);  // Y^deg reduced

CycloElem add(const CycloElem& a, const CycloElem& b);
CycloElem sub(const CycloElem& a, const CycloElem& b);
CycloElem mul(const CycloElem& a, const CycloElem& b);
CycloElem mul_scalar(const CycloElem& a, const Int& s);
CycloElem pow(const CycloElem& a, const Int& e);  // e >= 0

// Substitution Y -> Y^(e mod m); requires ring->m > 0 and gcd(e, m) = 1.
CycloElem frobenius(const CycloElem& a, const Int& e);

struct NotUnit {};  // nonzero non-unit with no factor surfaced (split ring)
struct ElemInvert {
    std::optional<CycloElem> inverse;
    std::optional<Int> factor;  // nontrivial factor of n
    bool zero_divisor = false;  // input was 0
    bool not_unit = false;
    bool is_unit() const { return inverse.has_value(); }
};
// Extended gcd of a against h over Z/nZ. Factors of n surface from
// non-invertible leading coefficients.
ElemInvert try_invert(const CycloElem& a);

// Phi_s(z) = 0 exactly in the ring. Evaluated as prod (z^d - 1)^(mu(s/d))
// over d | s, which needs only the prime list of s and handles large s.
bool is_primitive_root(const CycloElem& z, const Int& s);
bool is_primitive_root(const CycloElem& z, const Int& s, const Factorization& s_factors);

struct RootOfUnityWitness {
    RingPtr ring;
    CycloElem zeta;
    Int order;                 // s
    Int sigma_exponent;        // n mod max(m,1)
    std::vector<Int> psi;      // orbit polynomial coefficients (scalars), ascending, monic
};
struct BBFailure {
    int condition;             // 1: Phi_s(z) != 0; 2: nonconstant Psi coefficient
    std::string detail;
};
using BBResult = std::variant<RootOfUnityWitness, BBFailure>;

// Checks (i) Phi_s(z) = 0 and (ii) Psi(X) = prod_i (X - z^(n^i)), i = 1..t,
// has degree-0 coefficients only; t must be ord_s(n). Success certifies that
// every divisor of n lies in the cycle of n mod s.
BBResult verify_bb(const CycloElem& z, const Int& s, const Int& t);
BBResult verify_bb(const CycloElem& z, const Int& s, const Int& t, const Factorization& s_factors);

struct RootFailure {
    std::string reason;  // "not a p^l-th power" | "digit match not found" | "postcondition failed"
};
using RootResult = std::variant<CycloElem, RootFailure>;

// Deterministic p^l-th root: beta with beta^(p^l) = alpha, given zeta_sat of
// exact order p^k in the same ring, k = v_p(n^d - 1), l <= k, and
// alpha^((n^d-1)/p^l) = 1. The postcondition is re-checked before returning.
RootResult extract_root(const CycloElem& alpha, const Int& p, unsigned l,
                        const CycloElem& zeta_sat, unsigned k);

}  // namespace cyclo
