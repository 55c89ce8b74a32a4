#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dgreedy/experiment.hpp"
#include "json.hpp"

using namespace dgreedy;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small(ProblemChoice problem) {
    ExperimentConfig c;
    c.problem = problem;
    c.trial_level = 2;
    c.test_level = 3;
    c.sample_count = 12;
    c.n_max = 3;
    return c;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

}  // namespace

TEST(Config, EmptyInputGivesDefaults) {
    EXPECT_EQ(parse_config_text(""), ExperimentConfig{});
    EXPECT_EQ(parse_config_text("# only a comment\n\n"), ExperimentConfig{});
}

TEST(Config, FieldErrorsNameTheField) {
    try {
        parse_config_text("epsilon = -1\n");
        FAIL() << "no error";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "epsilon");
    }
    try {
        parse_config_text("trial_level = 4\ntest_level = 4\n");
        FAIL() << "no error";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "test_level");
    }
    try {
        parse_config_text("bogus = 1\n");
        FAIL() << "no error";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "bogus");
    }
    EXPECT_THROW(parse_config_text("sample_count = 0\n"), ConfigError);
    EXPECT_THROW(parse_config_text("parameter_interval = [2.0, 1.0]\n"), ConfigError);
    EXPECT_THROW(parse_config_text("zeta = 1.0\n"), ConfigError);
}

TEST(Config, RoundTrip) {
    ExperimentConfig c;
    c.problem = ProblemChoice::transport_jump;
    c.epsilon = 0.1 / 3.0;
    c.interval_lo = 0.3;
    c.tol = 1.0 / 7.0;
    c.cycles = 2;
    c.output_dir = "some dir";
    c.piece = 1;
    c.surrogate = SurrogateKind::reduced_dual;
    c.loop = StabLoop::inf_sup;
    EXPECT_EQ(parse_config_text(serialize_config(c)), c);
    EXPECT_EQ(parse_config_text(serialize_config(ExperimentConfig{})), ExperimentConfig{});
    const ExperimentConfig q = parse_config_text("problem = \"transport\"\nparameter_interval = [0.5, 1.5] # note\n");
    EXPECT_EQ(q.problem, ProblemChoice::transport);
    EXPECT_EQ(q.interval_lo, 0.5);
    EXPECT_EQ(q.interval_hi, 1.5);
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Config, GreedySettingsFollowProblem) {
    ExperimentConfig c;
    c.problem = ProblemChoice::transport;
    EXPECT_EQ(greedy_config(c).surrogate, SurrogateKind::reduced_dual);
    EXPECT_EQ(greedy_config(c).loop, StabLoop::delta);
    c.problem = ProblemChoice::cd;
    EXPECT_EQ(greedy_config(c).surrogate, SurrogateKind::truth_dual);
    EXPECT_EQ(greedy_config(c).loop, StabLoop::inf_sup);
}

TEST(Experiment, TableRowsAndCsvReparse) {
    const ExperimentResult r = run_experiment(small(ProblemChoice::cd));
    ASSERT_FALSE(r.table.rows.empty());
    for (const auto& row : r.table.rows) {
        EXPECT_LE(row.test, 3 * row.trial);
        EXPECT_EQ(row.ratio_kind, "surr/a-post");
    }
    const std::string csv = r.table.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kTableHeader);
    EXPECT_EQ(ReportTable::from_csv(csv), r.table);
}

TEST(Experiment, TransportColumns) {
    ExperimentConfig c = small(ProblemChoice::transport);
    c.piece = 0;
    const ExperimentResult r = run_experiment(c);
    ASSERT_FALSE(r.table.rows.empty());
    for (const auto& row : r.table.rows) {
        EXPECT_EQ(row.piece, 0);
        EXPECT_EQ(row.ratio_kind, "surr/err");
        EXPECT_GE(row.rb_truth, 0.0);
        EXPECT_GE(row.rb_l2, 0.0);
    }
}

TEST(Experiment, EmptyPieceRejected) {
    ExperimentConfig c = small(ProblemChoice::cd);
    c.sample_count = 1;
    c.piece = 1;
    EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Experiment, OutputsDeterministic) {
    const auto base = std::filesystem::temp_directory_path() / "dgreedy_unit_outputs";
    std::filesystem::remove_all(base);
    const ExperimentConfig c = small(ProblemChoice::cd);
    const ExperimentResult r1 = run_experiment(c);
    const ExperimentResult r2 = run_experiment(c);
    emit_outputs(r1, base / "a");
    emit_outputs(r2, base / "b");
    for (const char* f : {"table.csv", "history.json", "decay.csv"})
        EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;

    std::size_t iterations = 0;
    for (const auto& piece : r1.pieces)
        for (const auto& cyc : piece.cycles) iterations += cyc.history.records.size();
    const std::string decay = slurp(base / "a" / "decay.csv");
    EXPECT_EQ(decay.substr(0, decay.find('\n')), kDecayHeader);
    EXPECT_EQ(count_lines(decay), iterations + 1);

    const auto js = nlohmann::json::parse(slurp(base / "a" / "history.json"));
    EXPECT_TRUE(js.is_object());
    std::filesystem::remove_all(base);
}

TEST(Experiment, UnwritableDirectory) {
    const ExperimentResult r = run_experiment(small(ProblemChoice::synthetic_saddle));
    EXPECT_THROW(emit_outputs(r, "/proc/dgreedy_no_such_dir"), DataError);
}
