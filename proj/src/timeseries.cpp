#include "narfima/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "narfima/csv.hpp"
#include "narfima/error.hpp"

namespace narfima {

namespace {

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool parse_number(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

YearMonth YearMonth::parse(std::string_view text) {
    text = trim(text);
    int year = 0;
    int month = 0;
    if (text.size() != 7 || text[4] != '-' || !parse_int(text.substr(0, 4), year) ||
        !parse_int(text.substr(5, 2), month) || month < 1 || month > 12) {
        throw DomainError("expected YYYY-MM date, got '" + std::string(text) + "'");
    }
    return {year, month};
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::from_ordinal(long ordinal) {
    long year = ordinal / 12;
    long month0 = ordinal % 12;
    if (month0 < 0) {
        month0 += 12;
        --year;
    }
    return {static_cast<int>(year), static_cast<int>(month0) + 1};
}

TimeSeriesDataset::TimeSeriesDataset(std::string name, std::vector<YearMonth> timestamps,
                                     std::vector<double> target,
                                     std::vector<std::string> exogenous_names,
                                     std::vector<std::vector<double>> exogenous)
    : name_(std::move(name)),
      timestamps_(std::move(timestamps)),
      target_(std::move(target)),
      exogenous_names_(std::move(exogenous_names)),
      exogenous_(std::move(exogenous)) {
    const std::size_t n = target_.size();
    if (timestamps_.size() != n) throw ContractError("timestamps and target differ in length");
    if (exogenous_names_.size() != exogenous_.size())
        throw ContractError("exogenous names and columns differ in count");
    for (std::size_t j = 0; j < exogenous_.size(); ++j) {
        if (exogenous_[j].size() != n)
            throw ContractError("exogenous column '" + exogenous_names_[j] +
                                "' differs in length from target");
    }
    for (std::size_t t = 1; t < n; ++t) {
        if (timestamps_[t].ordinal() != timestamps_[t - 1].ordinal() + 1)
            throw ContractError("timestamps must be consecutive months: " +
                                timestamps_[t - 1].to_string() + " then " +
                                timestamps_[t].to_string());
    }
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(target_)) throw ContractError("target contains non-finite values");
    for (const auto& col : exogenous_)
        if (!finite(col)) throw ContractError("exogenous column contains non-finite values");
}

TimeSeriesDataset TimeSeriesDataset::from_values(std::string name, std::vector<double> target,
                                                 std::vector<std::string> exogenous_names,
                                                 std::vector<std::vector<double>> exogenous,
                                                 YearMonth start) {
    std::vector<YearMonth> stamps(target.size());
    for (std::size_t t = 0; t < stamps.size(); ++t) stamps[t] = start.plus_months(static_cast<long>(t));
    return TimeSeriesDataset(std::move(name), std::move(stamps), std::move(target),
                             std::move(exogenous_names), std::move(exogenous));
}

TimeSeriesDataset TimeSeriesDataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw ContractError("slice bounds out of range");
    auto cut = [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        return V(v.begin() + static_cast<std::ptrdiff_t>(begin),
                 v.begin() + static_cast<std::ptrdiff_t>(end));
    };
    std::vector<std::vector<double>> exog;
    exog.reserve(exogenous_.size());
    for (const auto& col : exogenous_) exog.push_back(cut(col));
    return TimeSeriesDataset(name_, cut(timestamps_), cut(target_), exogenous_names_,
                             std::move(exog));
}

MonthlyTable load_monthly_columns(const std::filesystem::path& path,
                                  const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError(0, "missing header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3);
    auto header = csv::split_record(line);
    for (auto& h : header) h = std::string(trim(h));

    auto find_column = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin() + 1, header.end(), name);
        if (header.empty() || it == header.end()) throw MissingColumnError(name);
        return static_cast<std::size_t>(it - header.begin());
    };
    std::vector<std::size_t> idx;
    for (const auto& name : columns) idx.push_back(find_column(name));

    std::vector<YearMonth> stamps;
    std::vector<std::vector<double>> values(columns.size());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty() || line == "\r") continue;
        auto fields = csv::split_record(line);
        if (fields.size() != header.size())
            throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
        YearMonth stamp;
        try {
            stamp = YearMonth::parse(fields[0]);
        } catch (const DomainError& e) {
            throw ParseError(row, e.what());
        }
        if (!stamps.empty() && stamp.ordinal() != stamps.back().ordinal() + 1) {
            throw ParseError(row, "gap or disorder in monthly dates: " +
                                      stamps.back().to_string() + " followed by " +
                                      stamp.to_string());
        }
        auto cell = [&](std::size_t idx) {
            double v = 0.0;
            if (!parse_number(fields[idx], v))
                throw ParseError(row, "non-numeric or missing value '" + fields[idx] +
                                          "' in column '" + header[idx] + "'");
            return v;
        };
        stamps.push_back(stamp);
        for (std::size_t j = 0; j < idx.size(); ++j) values[j].push_back(cell(idx[j]));
    }
    return {std::move(stamps), columns, std::move(values)};
}

TimeSeriesDataset load_dataset_csv(const std::filesystem::path& path,
                                   const std::string& target_column,
                                   const std::vector<std::string>& exogenous_columns) {
    std::vector<std::string> columns{target_column};
    columns.insert(columns.end(), exogenous_columns.begin(), exogenous_columns.end());
    auto table = load_monthly_columns(path, columns);
    if (table.timestamps.size() < 2) throw InsufficientDataError("dataset needs at least 2 rows");
    std::vector<double> target = std::move(table.values[0]);
    table.values.erase(table.values.begin());
    return TimeSeriesDataset(path.stem().string(), std::move(table.timestamps), std::move(target),
                             exogenous_columns, std::move(table.values));
}

void save_dataset_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path,
                      const std::string& target_column) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    std::vector<std::string> header{"date", target_column};
    for (const auto& n : dataset.exogenous_names()) header.push_back(n);
    csv::write_record(out, header);
    for (std::size_t t = 0; t < dataset.size(); ++t) {
        std::vector<std::string> rec{dataset.timestamps()[t].to_string(),
                                     csv::format_double(dataset.target()[t])};
        for (const auto& col : dataset.exogenous()) rec.push_back(csv::format_double(col[t]));
        csv::write_record(out, rec);
    }
}

TrainTestSplit rolling_split(const TimeSeriesDataset& dataset, std::size_t horizon) {
    if (horizon == 0) throw ContractError("horizon must be positive");
    if (horizon >= dataset.size())
        throw InsufficientDataError("horizon " + std::to_string(horizon) +
                                    " leaves no training data for T=" +
                                    std::to_string(dataset.size()));
    const std::size_t cut = dataset.size() - horizon;
    return {dataset.slice(0, cut), dataset.slice(cut, dataset.size())};
}

}  // namespace narfima
