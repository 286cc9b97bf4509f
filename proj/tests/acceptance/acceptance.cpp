// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include <spdlog/spdlog.h>

#include <refine_sdo/embedding.hpp>
#include <refine_sdo/error.hpp>
#include <refine_sdo/ifipm.hpp>
#include <refine_sdo/newton.hpp>
#include <refine_sdo/refine.hpp>
#include <refine_sdo/solvers.hpp>

#include "generators.hpp"
#include "newton_oracle.hpp"
#include "properties.hpp"
#include "run.hpp"

using namespace refine_sdo;
using refine_sdo::testing::Instance;
using refine_sdo::testing::Rng;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why)
    {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

int failures = 0;

void report(int n, const std::string& name, const std::function<Verdict()>& body)
{
    Verdict v;
    const auto t0 = Clock::now();
    try {
        v = body();
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass)
        ++failures;
    std::printf("%s criterion %d: %s (%.2fs)%s%s\n", v.pass ? "PASS" : "FAIL", n, name.c_str(), seconds_since(t0),
                v.detail.empty() ? "" : " - ", v.detail.c_str());
    std::fflush(stdout);
}

std::string describe(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

int max_m(int n, int cap)
{
    return std::min(cap, n * (n + 1) / 2 - 1);
}

std::vector<Instance> ir_instances()
{
    Rng rng(1001);
    std::vector<Instance> out;
    for (int c = 0; c < 20; ++c) {
        const int n = rng.integer(3, 10);
        out.push_back(refine_sdo::testing::random_standard_instance(rng, n, rng.integer(2, max_m(n, 8))));
    }
    return out;
}

Oracle default_oracle()
{
    return make_ifipm_oracle(IpmConfig{});
}

PrimalDualPoint random_interior(Rng& rng, const Instance& inst)
{
    PrimalDualPoint pt = inst.start;
    pt.X = refine_sdo::testing::random_pd(rng, inst.prob.layout());
    pt.S = refine_sdo::testing::random_pd(rng, inst.prob.layout());
    return pt;
}

double rel(const SymMat& a, const SymMat& b)
{
    return (a - b).norm() / (1.0 + b.norm());
}

Mat with_condition(Rng& rng, int n, double kappa)
{
    const Mat u = rng.normal_mat(n, n).householderQr().householderQ();
    const Mat v = rng.normal_mat(n, n).householderQr().householderQ();
    Vec s(n);
    for (int i = 0; i < n; ++i)
        s(i) = std::pow(kappa, static_cast<double>(i) / (n - 1));
    return u * s.asDiagonal() * v.transpose();
}

// min tr(CX) s.t. tr(X) = 1 with C = diag(1, 2), started on the central path.
Instance toy_ir_instance()
{
    Instance t;
    Mat c(2, 2), x(2, 2);
    c << 1, 0, 0, 2;
    x << 2.0 / 3.0, 0, 0, 1.0 / 3.0;
    t.prob.C = SymMat(c);
    t.prob.A = {SymMat::identity({2})};
    t.prob.b = Vec::Ones(1);
    t.start = PrimalDualPoint{SymMat(x), Vec::Zero(1), t.prob.C, Vec()};
    return t;
}

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::err);

    // One refinement run to 1e-12 per instance serves criteria 1 and 2.
    std::vector<IrResult> ir_runs;
    double ir_seconds = 0.0;
    std::string ir_error;
    {
        const auto t0 = Clock::now();
        IrOptions opt;
        opt.eps_oracle = 1e-2;
        opt.eps_final = 1e-12;
        try {
            for (const Instance& inst : ir_instances())
                ir_runs.push_back(ir_feasible(inst.prob, inst.start, opt, default_oracle()));
        } catch (const std::exception& e) {
            ir_error = e.what();
        }
        ir_seconds = seconds_since(t0);
    }

    report(1, "quadratic gap reduction on 20 random instances", [&] {
        Verdict v;
        v.require(ir_error.empty(), "refinement failed: " + ir_error);
        v.require(ir_runs.size() == 20, "not all instances ran");
        double worst = 0.0;
        for (const IrResult& r : ir_runs)
            for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
                const double g0 = r.trace.records[k - 1].gap, g1 = r.trace.records[k].gap;
                worst = std::max(worst, g1 - (1e-2 * g0 * g0 + 1e-12));
            }
        v.require(worst <= 0.0, describe("bound exceeded by %.3e", worst));
        v.require(ir_seconds < 30.0, describe("took %.1f s", ir_seconds));
        v.detail = v.pass ? describe("refinement time %.2f s", ir_seconds) : v.detail;
        return v;
    });

    report(2, "at most 3 refinements from 1e-2 to 1e-12", [&] {
        Verdict v;
        v.require(ir_error.empty() && ir_runs.size() == 20, "refinement runs incomplete");
        int most = 0;
        for (const IrResult& r : ir_runs) {
            most = std::max(most, r.trace.outer_iterations());
            v.require(r.trace.records.back().gap <= 1e-12, describe("final gap %.3e", r.trace.records.back().gap));
        }
        v.require(most <= 3, describe("%g refinements", most));
        if (v.pass)
            v.detail = describe("max refinements %g", most);
        return v;
    });

    report(3, "exact linear mu decrease on a centered toy run", [] {
        Verdict v;
        Instance t;
        t.prob.C = SymMat::identity({2});
        t.prob.A = {SymMat::identity({2})};
        t.prob.b = Vec::Constant(1, 2.0);
        t.start = PrimalDualPoint{SymMat::identity({2}), Vec::Zero(1), SymMat::identity({2}), Vec()};
        IpmConfig cfg;
        cfg.solver = SolverChoice::Direct;
        cfg.target_eps = 1e-8;
        const IpmResult r = ipm_solve_standard(t.prob, t.start, cfg);
        const double sigma = 1.0 - cfg.delta / std::sqrt(2.0);
        double worst = 0.0;
        for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
            v.require(r.trace.records[k].step == 1.0, "step was not full");
            worst = std::max(worst, std::abs(r.trace.records[k].mu / r.trace.records[k - 1].mu / sigma - 1.0));
        }
        v.require(worst <= 1e-9, describe("ratio deviates by %.3e", worst));
        const int bound = iteration_bound(2, cfg.delta, 1.0, cfg.target_eps);
        v.require(r.trace.iterations() <= bound, describe("%g iterations > bound %g", r.trace.iterations(), bound));
        if (v.pass)
            v.detail = describe("%g iterations, bound %g", r.trace.iterations(), bound);
        return v;
    });

    report(4, "feasibility retained with the iterative solver", [] {
        Verdict v;
        Rng rng(1004);
        double worst = 0.0;
        for (int c = 0; c < 10; ++c) {
            const int n = rng.integer(3, 6);
            const Instance inst = refine_sdo::testing::random_standard_instance(rng, n, rng.integer(2, max_m(n, 6)));
            IpmConfig cfg;
            cfg.solver = SolverChoice::Iterative;
            cfg.target_eps = 1e-4;
            const IpmResult r = ipm_solve_standard(inst.prob, inst.start, cfg);
            const double scale = 1.0 + inst.prob.b.norm() + inst.prob.C.norm();
            for (const auto& rec : r.trace.records) {
                worst = std::max(worst, std::max(rec.primal_residual, rec.dual_residual) / scale);
                if (rec.k > 0)
                    v.require(rec.method == SolveMethod::IterativeNormal, "direct solve used");
            }
        }
        v.require(worst <= 1e-9, describe("relative residual %.3e", worst));
        if (v.pass)
            v.detail = describe("worst relative residual %.2e", worst);
        return v;
    });

    report(5, "orthogonality of exact OSS directions", [] {
        Verdict v;
        Rng rng(1005);
        double worst_std = 0.0, worst_emb = 0.0;
        for (int c = 0; c < 50; ++c) {
            const int n = rng.integer(3, 6);
            const Instance inst = refine_sdo::testing::random_standard_instance(rng, n, rng.integer(1, max_m(n, 6)));
            const PrimalDualPoint pt = random_interior(rng, inst);
            const ConstraintBasis basis = make_constraint_basis(inst.prob);
            const Scaling s = static_cast<Scaling>(c % 3);
            const OssSystem sys = assemble_oss_standard(inst.prob, basis, pt, scaling_matrix(pt, s),
                                                        rng.uniform(0.1, 0.9), pt.X.dot(pt.S) / n);
            const StandardDirection d = recover_direction_standard(solve_direct(sys.M, sys.rhs).solution, sys);
            worst_std = std::max(worst_std, std::abs(d.dX.dot(d.dS)) / (d.dX.norm() * d.dS.norm()));
        }
        for (int c = 0; c < 50; ++c) {
            const Layout layout = refine_sdo::testing::random_layout(rng, rng.integer(2, 5), 2);
            const int m = rng.integer(1, 4);
            const SelfDualProblem e = build_embedding(refine_sdo::testing::random_canonical_problem(rng, layout, m));
            SelfDualPoint pt = initial_point(e);
            pt.X = refine_sdo::testing::random_pd(rng, layout);
            pt.S = refine_sdo::testing::random_pd(rng, layout);
            for (int i = 0; i < m; ++i) {
                pt.y(i) = rng.uniform(0.5, 2.0);
                pt.u(i) = rng.uniform(0.5, 2.0);
            }
            pt.tau = rng.uniform(0.5, 2.0);
            pt.phi = rng.uniform(0.5, 2.0);
            const OssSystem sys =
                assemble_oss_selfdual(e, pt, rng.uniform(0.1, 0.9), selfdual_mu(e, pt), static_cast<Scaling>(c % 3));
            const SelfDualDelta d = recover_direction_selfdual(solve_direct(sys.M, sys.rhs).solution, sys);
            const double sum = d.dX.dot(d.dS) + d.dy.dot(d.du) + d.dtau * d.dphi + d.dtheta * d.drho;
            const double scale = d.dX.norm() * d.dS.norm() + d.dy.norm() * d.du.norm() +
                                 std::abs(d.dtau * d.dphi) + std::abs(d.dtheta * d.drho);
            worst_emb = std::max(worst_emb, std::abs(sum) / scale);
        }
        v.require(worst_std <= 1e-10, describe("standard form %.3e", worst_std));
        v.require(worst_emb <= 1e-10, describe("embedding %.3e", worst_emb));
        if (v.pass)
            v.detail = describe("worst %.2e / %.2e", worst_std, worst_emb);
        return v;
    });

    report(6, "OSS directions match the dense Newton system", [] {
        Verdict v;
        Rng rng(1006);
        double worst = 0.0;
        for (int c = 0; c < 20; ++c) {
            const int n = rng.integer(3, 4);
            const Instance inst = refine_sdo::testing::random_standard_instance(rng, n, rng.integer(1, 4));
            const PrimalDualPoint pt = random_interior(rng, inst);
            const ConstraintBasis basis = make_constraint_basis(inst.prob);
            const double mu = pt.X.dot(pt.S) / n;
            for (Scaling s : {Scaling::NT, Scaling::HKM, Scaling::AHO}) {
                const SymMat p = scaling_matrix(pt, s);
                const OssSystem sys = assemble_oss_standard(inst.prob, basis, pt, p, 0.6, mu);
                const StandardDirection d = recover_direction_standard(solve_direct(sys.M, sys.rhs).solution, sys);
                const auto ref = refine_sdo::testing::dense_newton(inst.prob, pt, p, 0.6, mu);
                worst = std::max({worst, rel(d.dX, ref.dX), rel(d.dS, ref.dS),
                                  (d.dy - ref.dy).norm() / (1.0 + ref.dy.norm())});
            }
        }
        v.require(worst <= 1e-7, describe("relative difference %.3e", worst));
        if (v.pass)
            v.detail = describe("worst %.2e", worst);
        return v;
    });

    report(7, "embedding start is exact", [] {
        Verdict v;
        Rng rng(1007);
        double worst = 0.0;
        for (int c = 0; c < 20; ++c) {
            const Layout layout = refine_sdo::testing::random_layout(rng, rng.integer(1, 8), 3);
            const SelfDualProblem e =
                build_embedding(refine_sdo::testing::random_canonical_problem(rng, layout, rng.integer(1, 6)));
            const SelfDualPoint p0 = initial_point(e);
            worst = std::max(worst, embedding_residuals(e, p0).norm());
            v.require(selfdual_mu(e, p0) == 1.0, describe("mu0 = %.17g", selfdual_mu(e, p0)));
        }
        v.require(worst <= 1e-12, describe("residual %.3e", worst));
        if (v.pass)
            v.detail = describe("worst residual %.2e", worst);
        return v;
    });

    report(8, "AHO condition number trend", [] {
        Verdict v;
        // min tr(diag(1,1,2)X) s.t. tr X = 1: the optimal face is {X supported on the first two
        // coordinates}, so the Newton matrix becomes singular in the limit and κ grows like 1/μ.
        // Instances with a unique strictly complementary optimum keep κ bounded.
        Instance inst;
        Mat c = Mat::Identity(3, 3);
        c(2, 2) = 2.0;
        inst.prob.C = SymMat(c);
        inst.prob.A = {SymMat::identity({3})};
        inst.prob.b = Vec::Ones(1);
        // Central point with μ = 1: 2/(1−y) + 1/(2−y) = 1 gives y = −√3.
        const double a = 1.0 + std::sqrt(3.0);
        Mat x = Mat::Zero(3, 3), s = Mat::Zero(3, 3);
        x.diagonal() << 1 / a, 1 / a, 1 / (1 + a);
        s.diagonal() << a, a, 1 + a;
        inst.start = PrimalDualPoint{SymMat(x), Vec::Constant(1, -std::sqrt(3.0)), SymMat(s), Vec()};
        IpmConfig cfg;
        cfg.scaling = Scaling::AHO;
        cfg.solver = SolverChoice::Direct;
        cfg.estimate_condition = true;
        cfg.target_eps = 3 * 1e-3 * 0.9;
        const IpmResult r = ipm_solve_standard(inst.prob, inst.start, cfg);
        // κ of the first system assembled at or below each μ.
        auto kappa_at = [&](double mu) {
            for (const auto& rec : r.trace.records)
                if (rec.k > 0 && rec.mu <= mu)
                    return rec.kappa;
            return std::nan("");
        };
        const double k0 = r.trace.records.size() > 1 ? r.trace.records[1].kappa : std::nan("");
        const double k1 = kappa_at(1e-1), k2 = kappa_at(1e-2), k3 = kappa_at(1e-3);
        const double r12 = k2 / k1, r23 = k3 / k2;
        v.require(k1 < k2 && k2 < k3, describe("not monotone: %.3g %.3g %.3g", k1, k2, k3));
        v.require(r12 >= 3 && r12 <= 30 && r23 >= 3 && r23 <= 30, describe("decade ratios %.3g %.3g", r12, r23));
        // Refinement stops each oracle call at μ = ε/N.
        const double handoff = kappa_at(1e-2 / 3);
        v.require(handoff <= 100 * k0, describe("hand-off kappa %.3g vs %.3g at mu = 1", handoff, k0));
        if (v.pass)
            v.detail = describe("kappa %.3g -> %.3g -> %.3g", k1, k2, k3) + describe(", hand-off/start %.3g", handoff / k0);
        return v;
    });

    report(9, "infeasible refinement rates", [] {
        Verdict v;
        Rng rng(1009);
        std::vector<Instance> toys{toy_ir_instance()};
        for (int c = 0; c < 4; ++c)
            toys.push_back(refine_sdo::testing::random_standard_instance(rng, 3, 2));
        IrOptions opt;
        opt.rho = 10.0;
        opt.eps_oracle = 1e-2;
        opt.eps_final = 1e-8;
        const int bound = static_cast<int>(std::ceil(std::log(1e6) / std::log(1e2)));
        const double theta = std::min(opt.rho, 1.0 / opt.eps_oracle);
        int most = 0;
        for (const Instance& t : toys) {
            const IrResult ni = ir_infeasible_ni(t.prob, t.start, opt, default_oracle());
            const IrResult ii = ir_infeasible_ii(t.prob, t.start, opt, default_oracle());
            most = std::max(most, ni.trace.outer_iterations());
            v.require(in_pd_eps_in(t.prob, ni.point, 1e-8), "NI result outside PD_1e-8");
            v.require(in_pd_eps_ii(t.prob, ii.point, 1e-8), "II result outside PD_1e-8");
            for (const IrResult* r : {&ni, &ii})
                for (const auto& rec : r->trace.records)
                    v.require(rec.eta_log10 >= rec.k * std::log10(theta) - 1e-12,
                              describe("eta below bound at k = %g", rec.k));
        }
        v.require(most <= bound, describe("%g outer iterations > %g", most, bound));
        if (v.pass)
            v.detail = describe("max NI outer iterations %g of %g", most, bound);
        return v;
    });

    report(10, "kernel property suites", [] {
        Verdict v;
        const auto t0 = Clock::now();
        Rng rng(1010);
        const int cases = 200;
        const auto a = refine_sdo::testing::roundtrip_property(rng, cases);
        const auto b = refine_sdo::testing::isometry_property(rng, cases);
        const auto c = refine_sdo::testing::kron_action_property(rng, cases);
        const auto d = refine_sdo::testing::hp_identity_property(rng, cases);
        const auto e = refine_sdo::testing::nt_property(rng, cases);
        v.require(a.holds(1e-14), describe("roundtrip %.3e", a.worst));
        v.require(b.holds(1e-12), describe("isometry %.3e", b.worst));
        v.require(c.holds(1e-10), describe("kronecker action %.3e", c.worst));
        v.require(d.holds(1e-14), describe("H_I %.3e", d.worst));
        v.require(e.holds(1e-8), describe("NT %.3e", e.worst));
        const double secs = seconds_since(t0);
        v.require(secs < 5.0, describe("took %.2f s", secs));
        if (v.pass)
            v.detail = describe("%g cases per suite", cases);
        return v;
    });

    report(11, "iterative and direct solvers agree", [] {
        Verdict v;
        Rng rng(1011);
        for (int c = 0; c < 20; ++c) {
            const int n = rng.integer(5, 30);
            const double kappa = std::pow(10.0, rng.uniform(0.0, 4.0));
            const Mat m = with_condition(rng, n, kappa);
            const Vec rhs = rng.normal_vec(n);
            const DenseOperator dense(m);
            const CountingOperator counter(dense);
            const int max_iter = 20 * n;
            const SolveReport it = solve_iterative_normal(counter, rhs, 1e-12 * rhs.norm(), max_iter);
            const SolveReport dir = solve_direct(m, rhs);
            const double diff = (it.solution - dir.solution).norm() / dir.solution.norm();
            v.require(diff <= 1e-6 * kappa, describe("case %g: relative difference %.3e at kappa %.3g", c, diff, kappa));
            v.require(counter.products() <= 2 * static_cast<std::int64_t>(max_iter) + 1,
                      describe("case %g used %g products", c, static_cast<double>(counter.products())));
        }
        return v;
    });

    report(12, "command line solve of the bundled tiny instance", [] {
        Verdict v;
        cli::RunConfig cfg;
        cfg.command = cli::Command::Solve;
        cfg.input = REFINE_SDO_TINY_PATH;
        cfg.timing = false;
        const cli::RunOutcome a = cli::run(cfg);
        const cli::RunOutcome b = cli::run(cfg);
        v.require(a.exit_code == cli::Success, describe("exit code %g", a.exit_code));
        const std::string ja = cli::emit_trace(a.log, false).dump(2);
        const std::string jb = cli::emit_trace(b.log, false).dump(2);
        v.require(!ja.empty() && a.log.result.contains("solution"), "no solution in the log");
        if (v.pass) {
            const double gap = a.log.result["solution"]["gap"].get<double>();
            v.require(gap <= 1e-8, describe("gap %.3e", gap));
            v.detail = describe("gap %.2e", gap);
        }
        v.require(ja == jb, "logs differ between runs");
        return v;
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
