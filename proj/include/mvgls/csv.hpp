#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvgls/model.hpp"
#include "mvgls/simulate.hpp"

namespace mvgls {

/// Parsed panel CSV: header row, first column a date key (ISO-8601 or integer,
/// treated as an opaque string), remaining columns numeric.
struct CsvTable {
    std::string key_name;
    std::vector<std::string> columns;       // numeric column names
    std::vector<std::string> keys;          // per row
    std::vector<std::vector<double>> rows;  // rows[t][c]
};

CsvTable parse_csv(std::istream& in, const std::string& source_name);
CsvTable read_csv_file(const std::string& path);

/// Inner join of a returns table and a factors table on the date key,
/// preserving the returns-file row order.
struct JoinedPanel {
    PanelData panel;
    std::vector<std::string> dates;
    std::vector<std::string> asset_names;
    std::vector<std::string> factor_names;
};

JoinedPanel join_on_date(const CsvTable& returns, const CsvTable& factors);

/// One results-CSV row: case,N,k,T,test,level,rate,reps,failures,seed.
struct ResultRow {
    std::string case_name;
    int N = 0, k = 0, T = 0;
    std::string test;
    double level = 0.0, rate = 0.0;
    int reps = 0, failures = 0;
    std::uint64_t seed = 0;

    bool operator==(const ResultRow&) const = default;
};

/// Shortest round-trip decimal form (17 significant digits).
std::string format_double17(double v);

std::string results_csv_header();
std::string format_results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(std::istream& in);

std::vector<ResultRow> rejection_rows(const std::string& case_name, const SimConfig& cfg,
                                      const RejectionTable& table);

/// Text table with tests as column groups and levels 10/5/1% within each
/// group, one section per (case, N, k) cell and one line per T.
std::string render_rates_table(const std::vector<ResultRow>& rows);

}  // namespace mvgls
