#include "cyclo/prover.hpp"

#include <algorithm>
#include <chrono>
#include <random>

namespace cyclo {

namespace {

using Clock = std::chrono::steady_clock;

struct StageClock {
    Verdict& v;
    std::string stage;
    Clock::time_point start = Clock::now();
    StageClock(Verdict& v, std::string s) : v(v), stage(std::move(s)) {}
    ~StageClock() {
        v.timings.push_back({stage, std::chrono::duration<double>(Clock::now() - start).count()});
    }
};

Verdict composite_verdict(CompositeWitness w) {
    Verdict v;
    v.kind = Verdict::Kind::composite;
    v.diagnostics = w.describe();
    v.witness = std::move(w);
    return v;
}

Verdict inconclusive_verdict(const std::string& diag) {
    Verdict v;
    v.kind = Verdict::Kind::inconclusive;
    v.diagnostics = diag;
    return v;
}

Verdict trial_prime_verdict(const Int& n) {
    Verdict v;
    v.kind = Verdict::Kind::prime;
    Certificate cert;
    cert.n = n;
    cert.trial_only = true;
    v.certificate = certificate_serialize(cert);
    return v;
}

CompositeWitness plain_factor(const Int& n, const Int& f, const std::string& stage) {
    CompositeWitness w;
    w.kind = CompositeWitness::Kind::factor;
    w.n = n;
    w.factor = f;
    w.stage = stage;
    return w;
}

}  // namespace

DivisionResult final_division(const Int& n, const Int& S, const Int& t_div) {
    if (S * S <= n) throw std::invalid_argument("final_division: S^2 <= n");
    Int r = mod(n, S);
    for (Int i = 1; i < t_div; i++) {
        if (r > 1 && r < n && mod(n, r) == 0) {
            CompositeWitness w;
            w.kind = CompositeWitness::Kind::final_division;
            w.n = n;
            w.S = S;
            w.index = i;
            w.r_i = r;
            w.factor = r;
            w.stage = "final division";
            return w;
        }
        r = mod(r * n, S);
    }
    return DivisionPass{};
}

Verdict prove(const Int& n, const ProveConfig& cfg) {
    EngineContext ctx(cfg.planner.table_bound);
    return prove_with_context(n, cfg, ctx);
}

Verdict prove_with_context(const Int& n, const ProveConfig& cfg, EngineContext& ctx) {
    auto t_start = Clock::now();
    Verdict verdict = [&]() -> Verdict {
        if (n < 2) return inconclusive_verdict("input below 2");
        if (n == 2) return trial_prime_verdict(n);
        if (mod(n, 2) == 0) return composite_verdict(plain_factor(n, 2, "parity"));

        Verdict v;

        // ---- screen ----
        {
            StageClock sc(v, "screen");
            Candidate cand = screen(n, cfg.screen_bound);
            if (cand.screen_factor) {
                auto out = composite_verdict(plain_factor(n, *cand.screen_factor, "screen"));
                out.timings = std::move(v.timings);
                return out;
            }
            if (cand.settled_prime) {
                auto out = trial_prime_verdict(n);
                out.timings = std::move(v.timings);
                return out;
            }
        }

        uint64_t seed = cfg.seed;
        if (!cfg.seeded) seed = std::random_device{}() ^ (uint64_t(std::random_device{}()) << 32);
        Rng rng(seed + 0x9e3779b97f4a7c15ull * cfg.recursion_depth);

        // ---- plan (step B) ----
        TestPlan plan;
        {
            StageClock sc(v, "plan");
            auto planned = build_plan(n, cfg.factored_part, cfg.planner);
            if (auto* pv = std::get_if<PlanVerdict>(&planned)) {
                if (pv->n_is_prime) {
                    auto out = trial_prime_verdict(n);
                    out.timings = std::move(v.timings);
                    return out;
                }
                auto out = composite_verdict(plain_factor(n, pv->factor, "plan: " + pv->note));
                out.timings = std::move(v.timings);
                return out;
            }
            if (auto* pf = std::get_if<PlanFailure>(&planned)) {
                auto out = inconclusive_verdict("plan: " + pf->diagnostic);
                out.timings = std::move(v.timings);
                return out;
            }
            plan = std::get<TestPlan>(planned);
        }

        // ---- work extensions (step A) ----
        std::map<unsigned long, WorkExtension> works;
        {
            StageClock sc(v, "work extensions");
            for (unsigned long p : plan.work_primes) {
                auto wr = build_work_extension(n, p, rng, cfg.sampler);
                if (auto* cw = std::get_if<CompositeWitness>(&wr)) {
                    auto out = composite_verdict(*cw);
                    out.timings = std::move(v.timings);
                    return out;
                }
                if (auto* inc = std::get_if<Inconclusive>(&wr)) {
                    auto out = inconclusive_verdict(inc->diagnostic);
                    out.timings = std::move(v.timings);
                    return out;
                }
                works.emplace(p, std::get<WorkExtension>(wr));
            }
        }

        // ---- Lucas-Lehmer part (step C1) ----
        std::optional<LLWitness> ll;
        if (plan.s1 > 1) {
            StageClock sc(v, "lucas-lehmer");
            Int t_ll = 1;
            for (const auto& e : plan.s_prime_entries) t_ll = lcm(t_ll, e.order);
            auto rr = build_frobenius_ring(n, t_ll.get_ui(), rng, cfg.sampler.ring_budget);
            if (auto* cw = std::get_if<CompositeWitness>(&rr)) {
                auto out = composite_verdict(*cw);
                out.timings = std::move(v.timings);
                return out;
            }
            if (auto* inc = std::get_if<Inconclusive>(&rr)) {
                auto out = inconclusive_verdict(inc->diagnostic);
                out.timings = std::move(v.timings);
                return out;
            }
            auto llr = ll_prove(std::get<RingPtr>(rr), plan.s_prime_entries, rng, cfg.sampler);
            if (auto* cw = std::get_if<CompositeWitness>(&llr)) {
                auto out = composite_verdict(*cw);
                out.timings = std::move(v.timings);
                return out;
            }
            if (auto* inc = std::get_if<Inconclusive>(&llr)) {
                auto out = inconclusive_verdict(inc->diagnostic);
                out.timings = std::move(v.timings);
                return out;
            }
            ll = std::get<LLWitness>(llr);
        }

        // ---- Jacobi sum part (step C2), amalgamated ----
        std::vector<PairResult> results;
        {
            StageClock sc(v, "jacobi checks");
            for (const auto& am : plan.amalgams) {
                auto ar = check_amalgam(ctx, am, n);
                if (auto* cw = std::get_if<CompositeWitness>(&ar)) {
                    auto out = composite_verdict(*cw);
                    out.timings = std::move(v.timings);
                    return out;
                }
                for (auto& r : std::get<std::vector<PairResult>>(ar)) results.push_back(r);
            }
        }

        // ---- conclude ----
        ExtensionProof proof;
        {
            auto cr = conclude(plan, results, works, ll ? &*ll : nullptr);
            if (auto* inc = std::get_if<Inconclusive>(&cr)) {
                auto out = inconclusive_verdict(inc->diagnostic);
                out.timings = std::move(v.timings);
                return out;
            }
            proof = std::get<ExtensionProof>(cr);
        }

        // ---- witnesses (step C2') ----
        std::vector<PairWitness> wits;
        if (cfg.want_certificate) {
            StageClock sc(v, "witnesses");
            std::map<CharPair, unsigned long> eta_by_pair;
            for (const auto& r : results) eta_by_pair[r.pair] = r.eta;
            for (const auto& pr : plan.P) {
                const WorkExtension& work = works.at(pr.p);
                bool root_ok = pr.k <= work.k && !(pr.p == 2 && mod(n, 4) == 3);
                if (root_ok) {
                    auto wo = make_witness(ctx, pr, eta_by_pair.at(pr), work);
                    if (auto* cw = std::get_if<CompositeWitness>(&wo)) {
                        auto out = composite_verdict(*cw);
                        out.timings = std::move(v.timings);
                        return out;
                    }
                    wits.push_back(std::get<PairWitness>(wo));
                } else {
                    PairWitness w;
                    w.pair = pr;
                    w.root_mode = false;
                    w.eta = eta_by_pair.at(pr);
                    wits.push_back(w);
                }
            }
        }

        // ---- final trial division (step C3) ----
        {
            StageClock sc(v, "final division");
            auto dr = final_division(n, plan.S, plan.t_div);
            if (auto* cw = std::get_if<CompositeWitness>(&dr)) {
                auto out = composite_verdict(*cw);
                out.timings = std::move(v.timings);
                return out;
            }
        }

        // ---- certificate assembly ----
        v.kind = Verdict::Kind::prime;
        if (cfg.want_certificate) {
            StageClock sc(v, "certificate");
            Certificate cert;
            cert.n = n;
            cert.plan.t = plan.t;
            cert.plan.s = plan.s;
            cert.plan.s_prime = plan.s_prime;
            cert.plan.s1 = plan.s1;
            cert.plan.S = plan.S;
            cert.plan.t_div = plan.t_div;
            cert.plan.Q = plan.Q;
            cert.plan.P = plan.P;
            std::sort(cert.plan.P.begin(), cert.plan.P.end());
            for (const auto& am : plan.amalgams) {
                std::vector<unsigned long> idx;
                for (const auto& m : am.members) {
                    auto it = std::find(cert.plan.P.begin(), cert.plan.P.end(), m);
                    idx.push_back(it - cert.plan.P.begin());
                }
                std::sort(idx.begin(), idx.end());
                cert.plan.amalgams.push_back(idx);
            }
            std::sort(cert.plan.amalgams.begin(), cert.plan.amalgams.end());
            for (const auto& e : plan.s_prime_entries) {
                CertAux aux;
                aux.qprime = e.qprime;
                aux.k = e.sat_k;
                aux.order = e.order;
                aux.trial = e.qprime < Int(kTrialThreshold);
                cert.plan.aux.push_back(aux);
            }
            std::sort(cert.plan.aux.begin(), cert.plan.aux.end(),
                      [](const CertAux& a, const CertAux& b) { return a.qprime < b.qprime; });

            for (const auto& [p, work] : works) {
                CertWork cw;
                cw.p = p;
                cw.k = work.k;
                cw.d = work.ring->d;
                cw.ring_m = work.ring->m;
                cw.h = work.ring->h;
                cw.zeta = work.zeta_sat.c;
                cert.works.push_back(std::move(cw));
            }
            if (ll && plan.s1 > 1) {
                CertLL cl;
                cl.s0 = ll->s0;
                cl.t = ll->ring->d;
                cl.ring_m = ll->ring->m;
                cl.h = ll->ring->h;
                cl.alpha = ll->alpha.c;
                for (const auto& tr : ll->transcripts) {
                    CertLL::Entry e;
                    e.qprime = tr.qprime;
                    e.k = tr.k;
                    e.coeffs = tr.coeffs;
                    cl.entries.push_back(std::move(e));
                }
                std::sort(cl.entries.begin(), cl.entries.end(),
                          [](const CertLL::Entry& a, const CertLL::Entry& b) { return a.qprime < b.qprime; });
                cert.ll = std::move(cl);
            }
            for (const auto& pr : cert.plan.P) {
                unsigned long pk = pr.pk();
                unsigned long amax = pk >= 3 ? pk - 2 : 1;
                for (unsigned long a = 1; a <= amax; a++) {
                    CertJac j;
                    j.pair = pr;
                    j.a = a;
                    j.value = ctx.table().sum(ctx.character(pr), a);
                    cert.jacs.push_back(std::move(j));
                }
            }
            cert.wits = wits;
            std::sort(cert.wits.begin(), cert.wits.end(),
                      [](const PairWitness& a, const PairWitness& b) { return a.pair < b.pair; });

            // Pratt recursion for large auxiliaries
            for (const auto& aux : cert.plan.aux) {
                if (aux.trial) {
                    if (!aux.qprime.fits_ulong_p() || !is_small_prime(aux.qprime.get_ui())) {
                        auto out = inconclusive_verdict("claimed auxiliary prime is composite: " +
                                                        aux.qprime.get_str());
                        out.timings = std::move(v.timings);
                        return out;
                    }
                    continue;
                }
                if (cfg.recursion_depth >= 8) {
                    auto out = inconclusive_verdict("Pratt recursion too deep");
                    out.timings = std::move(v.timings);
                    return out;
                }
                ProveConfig sub_cfg = cfg;
                sub_cfg.factored_part.clear();
                sub_cfg.recursion_depth = cfg.recursion_depth + 1;
                Verdict sub = prove_with_context(aux.qprime, sub_cfg, ctx);
                if (sub.kind != Verdict::Kind::prime) {
                    auto out = inconclusive_verdict("claimed auxiliary prime " + aux.qprime.get_str() +
                                                    " did not prove prime: " + sub.diagnostics);
                    out.timings = std::move(v.timings);
                    return out;
                }
                cert.subs.emplace_back(aux.qprime, sub.certificate);
            }
            std::sort(cert.subs.begin(), cert.subs.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            v.certificate = certificate_serialize(cert);
            auto self = verify_certificate_text(v.certificate);
            if (!self.accepted) {
                auto out = inconclusive_verdict("internal: certificate failed self-verification at " +
                                                self.reject_path);
                out.timings = std::move(v.timings);
                return out;
            }
        }
        return v;
    }();
    verdict.total_seconds = std::chrono::duration<double>(Clock::now() - t_start).count();
    return verdict;
}

}  // namespace cyclo
