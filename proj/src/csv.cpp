#include "mvgls/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "mvgls/errors.hpp"

namespace mvgls {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    for (std::string& f : out) {
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
        std::size_t b = f.find_first_not_of(" \t");
        f = (b == std::string::npos) ? std::string() : f.substr(b);
    }
    return out;
}

double parse_number(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || end != begin + s.size())
        throw Error(where + ": not a number: '" + s + "'");
    return v;
}

std::string strip_bom_cr(std::string line) {
    if (line.size() >= 3 && (unsigned char)line[0] == 0xEF && (unsigned char)line[1] == 0xBB &&
        (unsigned char)line[2] == 0xBF)
        line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source_name) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error(source_name + ": empty file");
    std::vector<std::string> header = split_line(strip_bom_cr(line));
    if (header.size() < 2) throw Error(source_name + ": need a date column plus data columns");
    table.key_name = header[0];
    table.columns.assign(header.begin() + 1, header.end());

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_bom_cr(line);
        if (line.empty()) continue;
        std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size())
            throw Error(source_name + ": line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
        table.keys.push_back(fields[0]);
        std::vector<double> row(fields.size() - 1);
        for (std::size_t c = 1; c < fields.size(); ++c)
            row[c - 1] = parse_number(fields[c], source_name + ": line " + std::to_string(line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw Error(source_name + ": no data rows");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_csv(in, path);
}

JoinedPanel join_on_date(const CsvTable& returns, const CsvTable& factors) {
    std::map<std::string, std::size_t> factor_index;
    for (std::size_t t = 0; t < factors.keys.size(); ++t) {
        if (!factor_index.emplace(factors.keys[t], t).second)
            throw Error("factors: duplicate date key '" + factors.keys[t] + "'");
    }
    std::vector<std::size_t> rt, ft;
    for (std::size_t t = 0; t < returns.keys.size(); ++t) {
        auto it = factor_index.find(returns.keys[t]);
        if (it == factor_index.end()) continue;
        rt.push_back(t);
        ft.push_back(it->second);
    }
    if (rt.empty()) throw Error("join: no dates shared between returns and factors");

    int T = int(rt.size());
    int N = int(returns.columns.size());
    int k = int(factors.columns.size());
    Matrix y(T, N), x(T, k);
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < N; ++i) y(t, i) = returns.rows[rt[t]][i];
        for (int a = 0; a < k; ++a) x(t, a) = factors.rows[ft[t]][a];
    }
    JoinedPanel out{PanelData::from_common_factors(y, x), {}, returns.columns, factors.columns};
    out.dates.reserve(rt.size());
    for (std::size_t idx : rt) out.dates.push_back(returns.keys[idx]);
    return out;
}

std::string format_double17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string results_csv_header() { return "case,N,k,T,test,level,rate,reps,failures,seed"; }

std::string format_results_csv(const std::vector<ResultRow>& rows) {
    std::string out = results_csv_header();
    out += '\n';
    for (const ResultRow& r : rows) {
        out += r.case_name;
        out += ',' + std::to_string(r.N);
        out += ',' + std::to_string(r.k);
        out += ',' + std::to_string(r.T);
        out += ',' + r.test;
        out += ',' + format_double17(r.level);
        out += ',' + format_double17(r.rate);
        out += ',' + std::to_string(r.reps);
        out += ',' + std::to_string(r.failures);
        out += ',' + std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> parse_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("results csv: empty");
    if (strip_bom_cr(line) != results_csv_header()) throw Error("results csv: unexpected header");
    std::vector<ResultRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_bom_cr(line);
        if (line.empty()) continue;
        std::vector<std::string> f = split_line(line);
        if (f.size() != 10)
            throw Error("results csv: line " + std::to_string(line_no) + " has wrong field count");
        ResultRow r;
        std::string where = "results csv line " + std::to_string(line_no);
        r.case_name = f[0];
        r.N = int(parse_number(f[1], where));
        r.k = int(parse_number(f[2], where));
        r.T = int(parse_number(f[3], where));
        r.test = f[4];
        r.level = parse_number(f[5], where);
        r.rate = parse_number(f[6], where);
        r.reps = int(parse_number(f[7], where));
        r.failures = int(parse_number(f[8], where));
        r.seed = std::strtoull(f[9].c_str(), nullptr, 10);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> rejection_rows(const std::string& case_name, const SimConfig& cfg,
                                      const RejectionTable& table) {
    std::vector<ResultRow> rows;
    rows.reserve(kNumTests * table.levels.size());
    for (int i = 0; i < kNumTests; ++i) {
        for (std::size_t l = 0; l < table.levels.size(); ++l) {
            ResultRow r;
            r.case_name = case_name;
            r.N = cfg.N;
            r.k = cfg.k;
            r.T = cfg.T;
            r.test = kTestNames[i];
            r.level = table.levels[l];
            r.rate = table.rates[i][l];
            r.reps = table.reps;
            r.failures = table.reps - table.successes[i];
            r.seed = cfg.seed;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

std::string render_rates_table(const std::vector<ResultRow>& rows) {
    // group: case -> (N,k) -> T -> test -> level -> rate
    struct Key {
        std::string case_name;
        int N, k;
        bool operator<(const Key& o) const {
            return std::tie(case_name, N, k) < std::tie(o.case_name, o.N, o.k);
        }
    };
    std::vector<double> levels;
    for (const ResultRow& r : rows)
        if (std::find(levels.begin(), levels.end(), r.level) == levels.end())
            levels.push_back(r.level);
    std::sort(levels.begin(), levels.end(), std::greater<>());

    std::map<Key, std::map<int, std::map<std::string, std::map<double, double>>>> grid;
    for (const ResultRow& r : rows) grid[{r.case_name, r.N, r.k}][r.T][r.test][r.level] = r.rate;

    std::ostringstream out;
    const int col = 8;
    for (const auto& [key, by_t] : grid) {
        out << "Rejection rates, case " << key.case_name << "\n";
        out << std::string(10, ' ');
        for (const char* test : kTestNames) {
            int width = col * int(levels.size());
            std::string name(test);
            int pad = width - int(name.size());
            out << "  " << std::string(pad / 2, ' ') << name
                << std::string(pad - pad / 2, ' ');
        }
        out << "\n" << std::string(10, ' ');
        for (std::size_t g = 0; g < kNumTests; ++g) {
            out << "  ";
            for (double l : levels) {
                char buf[16];
                std::snprintf(buf, sizeof buf, "%*.0f%%", col - 1, l * 100.0);
                out << buf;
            }
        }
        out << "\n";
        out << "N=" << key.N << "/K=" << key.k << "\n";
        for (const auto& [t, by_test] : by_t) {
            char tbuf[16];
            std::snprintf(tbuf, sizeof tbuf, "  T=%-6d", t);
            out << tbuf;
            for (const char* test : kTestNames) {
                out << "  ";
                auto it = by_test.find(test);
                for (double l : levels) {
                    char buf[16];
                    if (it != by_test.end() && it->second.count(l))
                        std::snprintf(buf, sizeof buf, "%*.3f", col, it->second.at(l));
                    else
                        std::snprintf(buf, sizeof buf, "%*s", col, "-");
                    out << buf;
                }
            }
            out << "\n";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace mvgls
