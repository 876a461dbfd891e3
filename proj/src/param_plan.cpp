#include "cyclo/param_plan.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cyclo {

unsigned long euler_phi(unsigned long m) {
    unsigned long r = 1, rem = m;
    for (unsigned long p = 2; p * p <= rem; p++) {
        if (rem % p) continue;
        unsigned long pe = 1;
        while (rem % p == 0) { rem /= p; pe *= p; }
        r *= pe - pe / p;
    }
    if (rem > 1) r *= rem - 1;
    return r;
}

FT f_of_t(const Int& t) {
    FT r;
    r.f = 1;
    auto tf = factor_completely(t);
    for (const Int& d : divisors_sorted(tf)) {
        Int q = d + 1;
        if (!mpz_fits_ulong_p(q.get_mpz_t())) continue;
        if (is_small_prime(q.get_ui())) {
            r.qs.push_back(q.get_ui());
            r.f *= q;
        }
    }
    return r;
}

std::optional<Int> select_t(const Int& n, const PlannerConfig& cfg) {
    for (unsigned long t = 1; t <= cfg.t_ceiling; t++) {
        FT ft = f_of_t(Int(t));
        if (ft.f * ft.f > n) return Int(t);
    }
    return std::nullopt;
}

std::variant<PairSets, PlanVerdict> build_pairs(const Int& n, const Int& t,
                                                const std::vector<unsigned long>& qs) {
    PairSets out;
    for (unsigned long q : qs) {
        if (mod(n, Int(q)) == 0) {
            PlanVerdict v;
            if (n == Int(q)) { v.n_is_prime = true; v.note = "n equals auxiliary prime " + std::to_string(q); }
            else { v.factor = Int(q); v.note = "auxiliary prime divides n"; }
            return v;
        }
        out.Q.push_back(q);
        auto f = factor_completely(Int(q - 1));
        for (const auto& pp : f) {
            CharPair pair;
            pair.p = pp.p.get_ui();
            pair.k = pp.e;
            pair.q = q;
            out.P.push_back(pair);
        }
    }
    (void)t;
    return out;
}

namespace {

Int pair_order(const CharPair& pr, const Int& n) {
    // ord_{p^k}(n)
    Int pk(pr.pk());
    return mult_order(n, pk);
}

// Full trial division; for the small n that reach these paths only.
PlanVerdict settle_small(const Int& n, const std::string& note) {
    PlanVerdict v;
    v.note = note;
    Int root = isqrt(n);
    for (Int d = 2; d <= root; d++) {
        if (mod(n, d) == 0) {
            v.factor = d;
            return v;
        }
    }
    v.n_is_prime = true;
    return v;
}

}  // namespace

std::vector<Amalgam> build_amalgams(const std::vector<CharPair>& P, const Int& n,
                                    unsigned long phi_cap) {
    std::vector<CharPair> pairs = P;
    std::sort(pairs.begin(), pairs.end(), [](const CharPair& a, const CharPair& b) {
        if (a.pk() != b.pk()) return a.pk() > b.pk();
        return a.q < b.q;
    });
    std::vector<bool> placed(pairs.size(), false);
    std::vector<Int> orders(pairs.size());
    for (size_t i = 0; i < pairs.size(); i++) orders[i] = pair_order(pairs[i], n);

    std::vector<Amalgam> out;
    for (size_t seed = 0; seed < pairs.size(); seed++) {
        if (placed[seed]) continue;
        Amalgam am;
        am.members.push_back(pairs[seed]);
        am.f = pairs[seed].pk();
        placed[seed] = true;
        std::set<unsigned long> used_p{pairs[seed].p};
        Int root_order = orders[seed];
        bool rooted = true;
        // rooted-preserving additions first, then any coprime addition
        for (int phase = 0; phase < 2; phase++) {
            for (size_t j = seed + 1; j < pairs.size(); j++) {
                if (placed[j] || used_p.count(pairs[j].p)) continue;
                unsigned long joint = am.f * pairs[j].pk();
                if (euler_phi(joint) > phi_cap) continue;
                bool keeps_root = mpz_divisible_p(root_order.get_mpz_t(), orders[j].get_mpz_t());
                if (phase == 0 && !keeps_root) continue;
                am.members.push_back(pairs[j]);
                am.f = joint;
                used_p.insert(pairs[j].p);
                placed[j] = true;
                if (!keeps_root) rooted = false;
            }
        }
        if (rooted) am.root = am.members.front();
        out.push_back(std::move(am));
    }
    return out;
}

unsigned valuation_of_power_minus_one(const Int& n, const Int& t, const Int& q) {
    unsigned v = 0;
    Int qpow = q;
    while (true) {
        Int next = qpow * q;
        if (pow_mod(n, t, next) != 1) {
            // valuation is v+1 if n^t = 1 mod qpow
            if (pow_mod(n, t, qpow) == 1) return v + 1;
            return v;
        }
        v++;
        qpow = next;
    }
}

std::variant<std::vector<SPrimeEntry>, PlanVerdict, PlanFailure> ingest_factored_part(
    const Int& n, const Int& t, const Factorization& t_factors, const Int& s,
    const std::vector<Int>& claimed_primes) {
    std::vector<SPrimeEntry> entries;
    std::set<std::string> seen;
    auto divisors = divisors_sorted(t_factors);
    for (const Int& qp : claimed_primes) {
        if (qp < 3) return PlanFailure{"claimed factor below 3"};
        if (!seen.insert(qp.get_str()).second) return PlanFailure{"duplicate claimed factor"};
        if (gcd(qp, s) != 1) return PlanFailure{"claimed factor divides s"};
        if (mod(n, qp) == 0) {
            if (n == qp) return settle_small(n, "n equals claimed auxiliary prime");
            PlanVerdict v;
            v.factor = qp;
            v.note = "claimed auxiliary prime divides n";
            return v;
        }
        // exact order: least divisor d of t with q' | n^d - 1
        Int order = 0;
        for (const Int& d : divisors) {
            if (pow_mod(n, d, qp) == 1) { order = d; break; }
        }
        if (order == 0) return PlanFailure{"claimed factor does not divide n^t - 1: " + qp.get_str()};
        SPrimeEntry e;
        e.qprime = qp;
        e.order = order;
        e.sat_k = valuation_of_power_minus_one(n, order, qp);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::variant<TestPlan, PlanVerdict, PlanFailure> build_plan(const Int& n,
                                                            const std::vector<Int>& factored_part,
                                                            const PlannerConfig& cfg) {
    TestPlan plan;
    plan.n = n;
    auto t = select_t(n, cfg);
    if (!t) return PlanFailure{"select_t: scan ceiling exhausted"};
    plan.t = *t;
    plan.t_factors = factor_completely(plan.t);
    FT ft = f_of_t(plan.t);
    plan.s = ft.f;

    // gcd(n, s*t) check before anything heavier
    Int g = gcd(n, plan.s * plan.t);
    if (g != 1) {
        if (g == n) return settle_small(n, "n divides s*t");
        PlanVerdict v;
        v.factor = g;
        v.note = "gcd(n, s*t) nontrivial";
        return v;
    }

    auto pairs = build_pairs(n, plan.t, ft.qs);
    if (auto* verdict = std::get_if<PlanVerdict>(&pairs)) return *verdict;
    plan.Q = std::get<PairSets>(pairs).Q;
    plan.P = std::get<PairSets>(pairs).P;
    plan.amalgams = build_amalgams(plan.P, n, cfg.phi_cap);

    auto ingested = ingest_factored_part(n, plan.t, plan.t_factors, plan.s, factored_part);
    if (auto* verdict = std::get_if<PlanVerdict>(&ingested)) return *verdict;
    if (auto* fail = std::get_if<PlanFailure>(&ingested)) return *fail;
    plan.s_prime_entries = std::get<std::vector<SPrimeEntry>>(ingested);
    for (const auto& e : plan.s_prime_entries) {
        plan.s_prime *= e.qprime;
        for (unsigned i = 0; i < e.sat_k; i++) plan.s1 *= e.qprime;
    }
    Int gp = gcd(n, plan.s_prime);
    if (gp != 1) {
        PlanVerdict v;
        v.factor = gp;
        v.note = "gcd(n, s') nontrivial";
        return v;
    }

    plan.S = plan.s * plan.s1;
    if (plan.S * plan.S <= n) return PlanFailure{"S^2 <= n; re-plan with larger target"};

    // t_div = ord_S(n), via a factored multiple of the order
    Int T = 1;
    Factorization Tf;
    for (unsigned long q : plan.Q) {
        auto qf = factor_completely(Int(q - 1));
        factorization_lcm_into(Tf, qf);
    }
    for (const auto& e : plan.s_prime_entries) {
        auto of = factor_completely(e.order);
        factorization_lcm_into(Tf, of);
        if (e.sat_k > 1) factorization_lcm_into(Tf, {{e.qprime, e.sat_k - 1}});
    }
    T = factorization_value(Tf);
    plan.t_div = mult_order_from_multiple(n, plan.S, T, Tf);

    for (const auto& pp : plan.t_factors) plan.work_primes.push_back(pp.p.get_ui());
    std::sort(plan.work_primes.begin(), plan.work_primes.end());
    return plan;
}

}  // namespace cyclo
