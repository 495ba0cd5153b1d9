// gdprox/csv.hpp
//
// Minimal CSV emission. Doubles are written with 17 significant digits so
// reruns are byte-identical and values round-trip.

#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace gdprox {

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    void row_values(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
        out_ << '\n';
    }

private:
    template <class T>
    static std::string cell(const T& v) {
        if constexpr (std::is_same_v<T, bool>) return v ? "1" : "0";
        else if constexpr (std::is_floating_point_v<T>) return format_number(static_cast<double>(v));
        else if constexpr (std::is_integral_v<T>) return std::to_string(v);
        else return std::string(std::string_view(v));
    }

    std::ostream& out_;
};

} // namespace gdprox
