#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace rankbench {

// d x m grid of one quality metric: datasets on rows, methods on columns.
struct MetricMatrix {
    std::string metric;  // e.g. "ndcg"
    int k = 0;
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::vector<double>> values;  // [dataset][method]

    std::size_t num_datasets() const { return datasets.size(); }
    std::size_t num_methods() const { return methods.size(); }

    double at(std::size_t t, std::size_t i) const { return values[t][i]; }

    std::vector<double> column(std::size_t i) const {
        std::vector<double> c(values.size());
        for (std::size_t t = 0; t < values.size(); ++t) c[t] = values[t][i];
        return c;
    }
};

inline std::string format_double(double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline void write_metric_matrix(std::ostream& out, const MetricMatrix& q, char delim = ',') {
    out << "dataset";
    for (const auto& m : q.methods) out << delim << m;
    out << "\n";
    for (std::size_t t = 0; t < q.num_datasets(); ++t) {
        out << q.datasets[t];
        for (std::size_t i = 0; i < q.num_methods(); ++i) out << delim << format_double(q.values[t][i]);
        out << "\n";
    }
}

// Header = method names, first column = dataset names, cells finite reals.
inline MetricMatrix import_metric_matrix(std::istream& in, char delim = ',') {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("import_metric_matrix: empty input");
    if (!header.empty() && header.back() == '\r') header.pop_back();

    MetricMatrix q;
    {
        std::istringstream hs(header);
        std::string cell;
        bool first = true;
        while (std::getline(hs, cell, delim)) {
            if (first) { first = false; continue; }  // "dataset" corner cell
            q.methods.push_back(cell);
        }
    }
    if (q.methods.empty()) throw std::runtime_error("import_metric_matrix: no method columns");
    {
        std::unordered_set<std::string> seen(q.methods.begin(), q.methods.end());
        if (seen.size() != q.methods.size())
            throw std::runtime_error("import_metric_matrix: duplicate method labels");
    }

    std::string line;
    std::size_t line_no = 1;
    std::unordered_set<std::string> seen_datasets;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, delim)) cells.push_back(cell);
        if (!line.empty() && line.back() == delim) cells.push_back("");
        if (cells.size() != q.methods.size() + 1)
            throw std::runtime_error("import_metric_matrix: line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(q.methods.size() + 1) + " cells");
        if (!seen_datasets.insert(cells[0]).second)
            throw std::runtime_error("import_metric_matrix: duplicate dataset label '" + cells[0] + "'");
        q.datasets.push_back(cells[0]);
        std::vector<double> row(q.methods.size());
        for (std::size_t i = 0; i < q.methods.size(); ++i) {
            try {
                std::size_t used = 0;
                row[i] = std::stod(cells[i + 1], &used);
                if (used != cells[i + 1].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw std::runtime_error("import_metric_matrix: line " + std::to_string(line_no) +
                                         ": bad cell '" + cells[i + 1] + "'");
            }
            if (!std::isfinite(row[i]))
                throw std::runtime_error("import_metric_matrix: line " + std::to_string(line_no) +
                                         ": non-finite cell");
        }
        q.values.push_back(std::move(row));
    }
    if (q.values.empty()) throw std::runtime_error("import_metric_matrix: no data rows");
    return q;
}

inline MetricMatrix import_metric_matrix(const std::string& text, char delim = ',') {
    std::istringstream in(text);
    return import_metric_matrix(in, delim);
}

}  // namespace rankbench
