#pragma once

#include <optional>

#include "cyclo/jacobi_engine.hpp"

namespace cyclo {

// Exponent data for the root-of-unity twist applied before p^k-th root
// extraction: with t = ord_{p^k}(n) and n^t - 1 = p^v * w, the twist of
// chi(n) = zeta_{p^k}^j is zeta_sat^(j * e) with e = t * w^{-1} mod p^u.
struct TwistExponent {
    Int e;
    unsigned u = 0;  // k_n(p)
    Int t;           // ord_{p^k}(n)
    unsigned v = 0;  // v_p(n^t - 1) (= u for k <= u)
};
// Throws std::domain_error for p = 2 with n = 3 mod 4 and for k > k_n(p)
// (certification unsupported; such pairs get replay sections instead).
TwistExponent twist_exponent(const CharPair& pair, const Int& n);

struct PairWitness {
    CharPair pair;
    bool root_mode = true;
    unsigned long eta = 0;  // chi(n) exponent
    Int e;                  // twist exponent (root mode)
    std::vector<Int> beta;  // work-ring coefficients (root mode)
};

using WitnessOutcome = std::variant<PairWitness, CompositeWitness>;
// beta with beta^(p^k) = zeta_sat^(eta * e) * alpha_img, via deterministic
// root extraction in the work ring. Requires the pair identity to have
// passed (eta known).
WitnessOutcome make_witness(EngineContext& ctx, const CharPair& pair, unsigned long eta,
                            const WorkExtension& work);

// ---------------------------------------------------------------------------
// Certificate data model and file format
// ---------------------------------------------------------------------------

struct CertAux {
    Int qprime;
    unsigned k = 1;  // saturation exponent
    Int order;       // ord_{q'}(n)
    bool trial = true;  // below the recursion threshold; else a [sub] is present
};

struct CertPlan {
    Int t, s, s_prime, s1, S, t_div;
    std::vector<unsigned long> Q;
    std::vector<CharPair> P;
    std::vector<std::vector<unsigned long>> amalgams;  // indices into P
    std::vector<CertAux> aux;
};

struct CertWork {
    unsigned long p = 2;
    unsigned k = 1;
    unsigned long d = 1;
    unsigned long ring_m = 0;
    std::vector<Int> h;
    std::vector<Int> zeta;
};

struct CertLL {
    Int s0;
    unsigned long t = 1;
    unsigned long ring_m = 0;
    std::vector<Int> h;
    std::vector<Int> alpha;
    struct Entry {
        Int qprime;
        unsigned k = 1;
        std::vector<Int> coeffs;
    };
    std::vector<Entry> entries;
};

struct CertJac {
    CharPair pair;
    unsigned long a = 1;
    CycloInt value;
};

struct Certificate {
    Int n;
    bool trial_only = false;
    CertPlan plan;
    std::vector<CertWork> works;
    std::optional<CertLL> ll;
    std::vector<CertJac> jacs;
    std::vector<PairWitness> wits;
    std::vector<std::pair<Int, std::string>> subs;  // (q', full sub-certificate text)
};

// Canonical line-oriented text with a trailing sha256 line; byte-deterministic.
std::string certificate_serialize(const Certificate& cert);
// Throws std::runtime_error with a reason on malformed input.
Certificate certificate_parse(const std::string& text);

struct VerifyOutcome {
    bool accepted = false;
    std::string reject_path;           // section path of the first failure
    size_t witness_exponent_bits = 0;  // largest exponent used in [wit] checks
};
VerifyOutcome verify_certificate(const Certificate& cert);
VerifyOutcome verify_certificate_text(const std::string& text);

// Pratt threshold: auxiliary primes at or above carry nested certificates.
constexpr unsigned long kTrialThreshold = 100000000;  // 10^8
// Largest n acceptable for a [trial]-only certificate.
inline const Int kTrialCertLimit = Int(1000000000000);  // 10^12

}  // namespace cyclo
