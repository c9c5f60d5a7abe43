#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace narfima {

// Monthly period label.
struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    static YearMonth parse(std::string_view text);  // "YYYY-MM", throws DomainError
    std::string to_string() const;

    // Months since year 0.
    long ordinal() const { return static_cast<long>(year) * 12 + (month - 1); }
    static YearMonth from_ordinal(long ordinal);
    YearMonth plus_months(long n) const { return from_ordinal(ordinal() + n); }

    friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

// Target series plus named exogenous covariates on a gap-free monthly index.
// Immutable after construction.
class TimeSeriesDataset {
public:
    TimeSeriesDataset(std::string name, std::vector<YearMonth> timestamps,
                      std::vector<double> target, std::vector<std::string> exogenous_names,
                      std::vector<std::vector<double>> exogenous);

    // Convenience for synthetic data: consecutive months starting at `start`.
    static TimeSeriesDataset from_values(std::string name, std::vector<double> target,
                                         std::vector<std::string> exogenous_names = {},
                                         std::vector<std::vector<double>> exogenous = {},
                                         YearMonth start = {2000, 1});

    const std::string& name() const { return name_; }
    std::size_t size() const { return target_.size(); }
    std::size_t num_exogenous() const { return exogenous_.size(); }

    const std::vector<YearMonth>& timestamps() const { return timestamps_; }
    const std::vector<double>& target() const { return target_; }
    const std::vector<std::string>& exogenous_names() const { return exogenous_names_; }
    const std::vector<std::vector<double>>& exogenous() const { return exogenous_; }
    std::span<const double> exogenous(std::size_t j) const { return exogenous_.at(j); }

    // Rows [begin, end).
    TimeSeriesDataset slice(std::size_t begin, std::size_t end) const;

    friend bool operator==(const TimeSeriesDataset&, const TimeSeriesDataset&) = default;

private:
    std::string name_;
    std::vector<YearMonth> timestamps_;
    std::vector<double> target_;
    std::vector<std::string> exogenous_names_;
    std::vector<std::vector<double>> exogenous_;
};

// Raw monthly columns from a CSV whose first column is the YYYY-MM date.
struct MonthlyTable {
    std::vector<YearMonth> timestamps;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;  // one per requested column
};

MonthlyTable load_monthly_columns(const std::filesystem::path& path,
                                  const std::vector<std::string>& columns);

TimeSeriesDataset load_dataset_csv(const std::filesystem::path& path,
                                   const std::string& target_column,
                                   const std::vector<std::string>& exogenous_columns);

// Writes `date,<target>,<exog...>` with round-trip precision.
void save_dataset_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path,
                      const std::string& target_column = "target");

struct TrainTestSplit {
    TimeSeriesDataset train;
    TimeSeriesDataset test;
};

// First T-h observations for training, last h for testing.
TrainTestSplit rolling_split(const TimeSeriesDataset& dataset, std::size_t horizon);

inline const std::vector<std::size_t>& default_horizons() {
    static const std::vector<std::size_t> horizons{1, 3, 6, 12, 24, 48};
    return horizons;
}

}  // namespace narfima
