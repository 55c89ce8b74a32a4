#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dgreedy/config.hpp"
#include "dgreedy/tightening.hpp"

namespace dgreedy {

inline constexpr int kTableSchemaVersion = 1;
inline constexpr const char* kTableHeader =
    "piece,cycle,trial,test,delta,max_surrogate,rb_truth,rb_l2,ratio,ratio_kind";
inline constexpr const char* kDecayHeader = "piece,cycle,n,max_surrogate,best_error";

struct TableRow {
    int piece = 0;
    int cycle = 0;
    long trial = 0;
    long test = 0;
    double delta = 0.0;
    double max_surrogate = 0.0;
    double rb_truth = 0.0;
    double rb_l2 = 0.0;
    double ratio = 0.0;
    std::string ratio_kind;  // "surr/err" or "surr/a-post"

    bool operator==(const TableRow& o) const;
};

struct ReportTable {
    std::vector<TableRow> rows;

    std::string to_csv() const;
    static ReportTable from_csv(const std::string& text);
    bool operator==(const ReportTable&) const = default;
};

struct PieceRun {
    int piece = 0;
    CoverPiece cover;
    std::size_t samples = 0;
    std::vector<TighteningCycle> cycles;  // one entry without tightening
    std::vector<double> selected;         // snapshot parameters of the final cycle
};

struct ExperimentResult {
    ExperimentConfig config;
    ReportTable table;
    std::vector<PieceRun> pieces;
    SurrogateReport report;  // final cycle of every piece, concatenated
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string history_json(const ExperimentResult& result);
std::string decay_csv(const ExperimentResult& result);

// Writes table.csv, history.json and decay.csv; I/O failures raise DataError naming the path.
void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Small-scale invariant suite behind `dgreedy verify`.
std::vector<VerifyCheck> run_verify();

}  // namespace dgreedy
