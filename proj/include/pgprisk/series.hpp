#pragma once

// Price series ingestion: CSV loading, validation, and realized returns.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pgprisk {

struct Observation {
    /// Sort key. ISO dates map to days since 1970-01-01, integers map to themselves.
    std::int64_t key = 0;
    /// Timestamp exactly as it appeared in the input.
    std::string label;
    double price = 0.0;
};

/// Ordered, strictly positive price observations with unique timestamps.
/// Construction validates; instances are immutable afterwards.
class PriceSeries {
public:
    /// Validates ordering, uniqueness, positivity and length >= 2.
    explicit PriceSeries(std::vector<Observation> observations);

    /// Convenience for synthetic data: timestamps 0, 1, 2, ...
    static PriceSeries from_prices(std::span<const double> prices);

    std::size_t size() const noexcept { return observations_.size(); }
    const std::vector<Observation>& observations() const noexcept { return observations_; }
    const std::vector<double>& prices() const noexcept { return prices_; }
    double price(std::size_t i) const { return prices_.at(i); }

private:
    std::vector<Observation> observations_;
    std::vector<double> prices_;
};

struct ReturnSeries {
    /// Timestamp labels of the later price in each pair.
    std::vector<std::string> labels;
    /// returns[i] = price[i+1] / price[i] - 1
    std::vector<double> returns;
};

struct CsvColumns {
    std::string timestamp = "date";
    std::string price = "price";
};

/// Loads a header-led CSV file. Rows are sorted by timestamp after parsing.
/// Throws CsvError (row numbers are 1-based data rows) or InvalidSeries.
PriceSeries load_csv(const std::filesystem::path& path, const CsvColumns& columns = {});

/// Same as load_csv but parses from an in-memory string.
PriceSeries parse_csv(const std::string& text, const CsvColumns& columns = {});

/// Writes `date,price` rows (or the configured column names) readable by load_csv.
std::string to_csv(const PriceSeries& series, const CsvColumns& columns = {});

ReturnSeries to_returns(const PriceSeries& series);

/// Arithmetic returns of a raw price vector (length >= 2).
std::vector<double> simple_returns(std::span<const double> prices);

}  // namespace pgprisk
