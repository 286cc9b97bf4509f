#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <refine_sdo/error.hpp>

#include "generators.hpp"
#include "run.hpp"
#include "sdpa.hpp"

using namespace refine_sdo;
using namespace refine_sdo::cli;
using refine_sdo::testing::Rng;

namespace {

const char* kTiny = "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 1 1 1.0\n1 1 2 2 1.0\n";

template <class F>
int parse_error_line(F&& f, ErrorKind expected)
{
    try {
        f();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), expected) << e.what();
        return e.line();
    }
    ADD_FAILURE() << "no parse error";
    return -1;
}

std::filesystem::path scratch_dir()
{
    auto dir = std::filesystem::temp_directory_path() / "refine_sdo_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

RunConfig tiny_config(Command c)
{
    RunConfig cfg;
    cfg.command = c;
    cfg.input = REFINE_SDO_TINY_PATH;
    cfg.timing = false;
    return cfg;
}

} // namespace

TEST(Sdpa, TinyExample)
{
    const SdoProblem p = parse_sdpa(kTiny, Form::Standard);
    EXPECT_EQ(p.m(), 1);
    EXPECT_EQ(p.layout(), Layout{2});
    EXPECT_DOUBLE_EQ(p.b(0), 1.0);
    EXPECT_DOUBLE_EQ(p.C.block(0)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(p.C.block(0)(1, 1), 0.0);
    EXPECT_LE((p.A[0] - SymMat::identity({2})).max_abs(), 0.0);
    EXPECT_EQ(parse_sdpa(kTiny, Form::Canonical).form, Form::Canonical);
}

TEST(Sdpa, CommentsPunctuationAndWrappedHeader)
{
    const std::string text = "* a comment\n\"another\n1 =mdim\n1 =nblocks\n{2}\n(1.0)\n"
                             "0,1,1,2,0.5\n1 1 1 1 1.0\n1 1 2 2 1.0\n";
    const SdoProblem p = parse_sdpa(text, Form::Standard);
    EXPECT_DOUBLE_EQ(p.C.block(0)(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(p.C.block(0)(1, 0), 0.5);
}

TEST(Sdpa, DiagonalBlocksExpand)
{
    const std::string text = "1\n2\n2 -3\n1\n0 2 2 2 4\n1 1 1 1 1\n1 2 1 1 1\n1 2 3 3 1\n";
    const SdoProblem p = parse_sdpa(text, Form::Standard);
    EXPECT_EQ(p.layout(), (Layout{2, 1, 1, 1}));
    EXPECT_DOUBLE_EQ(p.C.block(2)(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(p.A[0].block(3)(0, 0), 1.0);
}

TEST(Sdpa, IndexOutOfBlock)
{
    const std::string bad = "1\n1\n2\n1.0\n0 1 3 3 1.0\n1 1 1 1 1.0\n";
    EXPECT_EQ(parse_error_line([&] { parse_sdpa(bad, Form::Standard); }, ErrorKind::IndexOutOfBlock), 5);
    const std::string bad_mat = "1\n1\n2\n1.0\n2 1 1 1 1.0\n";
    EXPECT_EQ(parse_error_line([&] { parse_sdpa(bad_mat, Form::Standard); }, ErrorKind::IndexOutOfBlock), 5);
    const std::string off_diag = "1\n1\n-2\n1.0\n1 1 1 2 1.0\n";
    EXPECT_EQ(parse_error_line([&] { parse_sdpa(off_diag, Form::Standard); }, ErrorKind::IndexOutOfBlock), 5);
}

TEST(Sdpa, ConflictingDuplicate)
{
    const std::string dup = "1\n1\n2\n1.0\n0 1 1 2 1.0\n0 1 2 1 2.0\n1 1 1 1 1.0\n";
    EXPECT_EQ(parse_error_line([&] { parse_sdpa(dup, Form::Standard); }, ErrorKind::NonSymmetricDuplicate), 6);
    const std::string same = "1\n1\n2\n1.0\n0 1 1 2 1.0\n0 1 2 1 1.0\n1 1 1 1 1.0\n";
    EXPECT_NO_THROW(parse_sdpa(same, Form::Standard));
}

TEST(Sdpa, MalformedTokens)
{
    EXPECT_EQ(parse_error_line([] { parse_sdpa("1\n1\n2\n1.0\n0 1 1 x 1.0\n", Form::Standard); },
                               ErrorKind::ParseError),
              5);
    EXPECT_EQ(parse_error_line([] { parse_sdpa("1\n1\n2\n1.0\n0 1 1 1\n", Form::Standard); }, ErrorKind::ParseError),
              5);
    parse_error_line([] { parse_sdpa("", Form::Standard); }, ErrorKind::ParseError);
}

TEST(Sdpa, EmitParseRoundtripIsBitwise)
{
    Rng rng(91);
    for (int c = 0; c < 100; ++c) {
        const Layout layout = refine_sdo::testing::random_layout(rng, rng.integer(1, 6), 3);
        SdoProblem p;
        p.C = refine_sdo::testing::random_sym(rng, layout);
        for (int i = 0, m = rng.integer(1, 4); i < m; ++i)
            p.A.push_back(refine_sdo::testing::random_sym(rng, layout));
        p.b = rng.normal_vec(p.m());
        const SdoProblem q = parse_sdpa(emit_sdpa(p), Form::Standard);
        ASSERT_EQ(q.layout(), p.layout());
        ASSERT_EQ(q.m(), p.m());
        EXPECT_EQ(q.b, p.b);
        for (int j = 0; j < p.C.num_blocks(); ++j) {
            EXPECT_EQ(q.C.block(j), p.C.block(j));
            for (int i = 0; i < p.m(); ++i)
                EXPECT_EQ(q.A[i].block(j), p.A[i].block(j));
        }
    }
}

TEST(Sdpa, LoadMissingFile)
{
    try {
        load_sdpa("/nonexistent/file.dat-s", Form::Standard);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IoError);
    }
}

TEST(Parsers, NamesAndRejections)
{
    EXPECT_EQ(parse_scaling("aho"), Scaling::AHO);
    EXPECT_EQ(parse_solver("iterative"), SolverChoice::Iterative);
    EXPECT_EQ(parse_ir_variant("infeasible-ii"), IrVariant::InfeasibleII);
    EXPECT_EQ(parse_form("canonical"), Form::Canonical);
    EXPECT_THROW(parse_scaling("xyz"), Error);
}

TEST(Validate, RejectsOutOfRange)
{
    RunConfig cfg;
    EXPECT_NO_THROW(validate(cfg));
    cfg.eps_oracle = 1.5;
    EXPECT_THROW(validate(cfg), Error);
    cfg = RunConfig{};
    cfg.rho = 0.5;
    EXPECT_THROW(validate(cfg), Error);
    cfg = RunConfig{};
    cfg.gamma = 1.5;
    EXPECT_THROW(validate(cfg), Error);
}

TEST(Run, SolveTinyIsPreciseAndDeterministic)
{
    const RunOutcome a = run(tiny_config(Command::Solve));
    ASSERT_EQ(a.exit_code, Success) << emit_trace(a.log, false).dump(2);
    const auto& sol = a.log.result["solution"];
    EXPECT_LE(sol["gap"].get<double>(), 1e-8);
    EXPECT_NEAR(sol["primal_objective"].get<double>(), 0.0, 1e-8);
    EXPECT_EQ(a.log.result["status"], "optimal");
    EXPECT_FALSE(a.log.ir_iterations.empty());
    EXPECT_EQ(a.log.ir_iterations[0]["k"], 0);
    const std::string ja = emit_trace(a.log, false).dump(2);
    const std::string jb = emit_trace(run(tiny_config(Command::Solve)).log, false).dump(2);
    EXPECT_EQ(ja, jb);
    EXPECT_EQ(ja.find("wall_seconds"), std::string::npos);
    EXPECT_EQ(ja.find("\"timing\""), std::string::npos);
}

TEST(Run, AllVariantsSolveTiny)
{
    for (IrVariant v : {IrVariant::InfeasibleNI, IrVariant::InfeasibleII}) {
        RunConfig cfg = tiny_config(Command::Solve);
        cfg.ir_variant = v;
        const RunOutcome r = run(cfg);
        EXPECT_EQ(r.exit_code, Success) << to_string(v);
    }
}

TEST(Run, EmbedOnlyReportsExactStart)
{
    const RunOutcome r = run(tiny_config(Command::EmbedOnly));
    ASSERT_EQ(r.exit_code, Success);
    EXPECT_EQ(r.log.result["status"], "embedded");
    EXPECT_LE(r.log.result["initial_residual"].get<double>(), 1e-14);
    EXPECT_DOUBLE_EQ(r.log.result["initial_mu"].get<double>(), 1.0);
    EXPECT_TRUE(r.log.ipm_iterations.empty());
}

TEST(Run, AnalyzeConditionTable)
{
    RunConfig cfg = tiny_config(Command::AnalyzeCondition);
    cfg.scaling = Scaling::AHO;
    cfg.eps_final = 1e-3;
    const RunOutcome r = run(cfg);
    ASSERT_EQ(r.exit_code, Success);
    const auto j = emit_trace(r.log, false);
    ASSERT_TRUE(j.contains("condition"));
    ASSERT_GE(j["condition"].size(), 2u);
    for (std::size_t i = 1; i < j["condition"].size(); ++i)
        EXPECT_GE(j["condition"][i]["kappa"].get<double>(), 1.0);
}

TEST(Run, MalformedInputExitsWithLine)
{
    const auto path = scratch_dir() / "bad.dat-s";
    {
        std::ofstream out(path);
        out << "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 9 9 1.0\n";
    }
    RunConfig cfg = tiny_config(Command::Solve);
    cfg.input = path.string();
    const RunOutcome r = run(cfg);
    EXPECT_EQ(r.exit_code, InputError);
    EXPECT_EQ(r.log.result["line"], 6);

    cfg.input = (scratch_dir() / "missing.dat-s").string();
    EXPECT_EQ(run(cfg).exit_code, InputError);
}

TEST(Run, InvalidParametersAreUsageErrors)
{
    RunConfig cfg = tiny_config(Command::Solve);
    cfg.delta = 0.9;
    EXPECT_EQ(run(cfg).exit_code, UsageError);
}

TEST(Run, CanonicalTinyHasNoInterior)
{
    RunConfig cfg = tiny_config(Command::Solve);
    cfg.form = Form::Canonical;
    EXPECT_EQ(run(cfg).exit_code, SolverFailure);
}

TEST(WriteAtomic, ReplacesContents)
{
    const auto path = scratch_dir() / "trace.json";
    write_atomic(path.string(), "first");
    write_atomic(path.string(), "second");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "second");
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    EXPECT_THROW(write_atomic("/nonexistent/dir/trace.json", "x"), Error);
}
