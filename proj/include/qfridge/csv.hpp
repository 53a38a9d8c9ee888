// csv.hpp - CSV tables with a '#' header block; numbers use the shortest
// round-trip form so identical inputs give identical bytes.
#pragma once

#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qfridge/config.hpp"

namespace qfridge::csv {

using Cell = std::variant<double, long long, std::string>;

class Table {
public:
    Table(std::string command, std::vector<std::string> columns)
        : command_(std::move(command)), columns_(std::move(columns)) {}

    /// Extra "# key = value" lines after the config block.
    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
    void meta(const std::string& key, double value) { meta(key, config::format_double(value)); }

    void row(std::vector<Cell> cells) {
        if (cells.size() != columns_.size()) throw Error("csv row width does not match the header");
        rows_.push_back(std::move(cells));
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

    void write(std::ostream& os, const config::RunConfig& cfg) const {
        os << "# qfridge " << config::kVersion << "\n";
        os << "# command = " << command_ << "\n";
        os << "# tolerance residual = " << config::format_double(cfg.residual_tol)
           << ", convergence = " << config::format_double(cfg.convergence_tol) << "\n";
        for (const auto& [k, v] : meta_) os << "# " << k << " = " << v << "\n";
        os << "# --- config\n";
        std::istringstream in(config::dump(cfg));
        for (std::string line; std::getline(in, line);) os << "#" << (line.empty() ? "" : " ") << line << "\n";
        os << "# ---\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) os << ',';
                std::visit(
                    [&](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, double>) os << config::format_double(v);
                        else if constexpr (std::is_same_v<T, long long>) os << v;
                        else os << v;
                    },
                    r[i]);
            }
            os << "\n";
        }
    }

private:
    std::string command_;
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace qfridge::csv
