#include "pgprisk/series.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "pgprisk/errors.hpp"

namespace pgprisk {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    for (auto& f : out) {
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    }
    return out;
}

enum class KeyKind { Integer, Date };

std::optional<std::int64_t> parse_integer(std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto y = parse_integer(s.substr(0, 4));
    auto m = parse_integer(s.substr(5, 2));
    auto d = parse_integer(s.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    using namespace std::chrono;
    year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*m)},
                       day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd}.time_since_epoch().count();
}

std::string describe_row(long row) { return "row " + std::to_string(row); }

}  // namespace

PriceSeries::PriceSeries(std::vector<Observation> observations)
    : observations_(std::move(observations)) {
    if (observations_.size() < 2) {
        throw InvalidSeries("a price series needs at least 2 observations, got " +
                            std::to_string(observations_.size()));
    }
    prices_.reserve(observations_.size());
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& o = observations_[i];
        if (!(o.price > 0.0) || !std::isfinite(o.price)) {
            throw InvalidSeries("non-positive or non-finite price at position " + std::to_string(i));
        }
        if (i > 0 && !(observations_[i - 1].key < o.key)) {
            throw InvalidSeries("timestamps must be strictly increasing (position " +
                                std::to_string(i) + ", '" + o.label + "')");
        }
        prices_.push_back(o.price);
    }
}

PriceSeries PriceSeries::from_prices(std::span<const double> prices) {
    std::vector<Observation> obs;
    obs.reserve(prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i) {
        obs.push_back({static_cast<std::int64_t>(i), std::to_string(i), prices[i]});
    }
    return PriceSeries(std::move(obs));
}

PriceSeries parse_csv(const std::string& text, const CsvColumns& columns) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty input, header row required");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

    auto header = split_fields(line);
    auto find_col = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw CsvError("header is missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ts_col = find_col(columns.timestamp);
    const std::size_t px_col = find_col(columns.price);

    std::vector<std::string> raw_lines;
    while (std::getline(in, line)) raw_lines.push_back(line);
    // A single trailing newline produces no extra line; tolerate trailing blank lines only.
    while (!raw_lines.empty() && trim(raw_lines.back()).empty()) raw_lines.pop_back();

    std::optional<KeyKind> kind;
    std::vector<Observation> obs;
    obs.reserve(raw_lines.size());
    for (std::size_t i = 0; i < raw_lines.size(); ++i) {
        const long row = static_cast<long>(i) + 1;
        std::string_view body = trim(raw_lines[i]);
        if (body.empty()) throw CsvError(describe_row(row) + ": blank row", row);
        auto fields = split_fields(body);
        if (fields.size() != header.size()) {
            throw CsvError(describe_row(row) + ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()),
                           row);
        }
        std::string_view ts = fields[ts_col];
        std::string_view px = fields[px_col];
        if (ts.empty() || px.empty()) throw CsvError(describe_row(row) + ": missing value", row);

        std::optional<std::int64_t> key;
        KeyKind this_kind = KeyKind::Integer;
        if ((key = parse_integer(ts))) {
            this_kind = KeyKind::Integer;
        } else if ((key = parse_iso_date(ts))) {
            this_kind = KeyKind::Date;
        } else {
            throw CsvError(describe_row(row) + ": cannot parse timestamp '" + std::string(ts) + "'",
                           row);
        }
        if (kind && *kind != this_kind) {
            throw CsvError(describe_row(row) + ": mixes integer and date timestamps", row);
        }
        kind = this_kind;

        double price = 0.0;
        auto [ptr, ec] = std::from_chars(px.data(), px.data() + px.size(), price);
        if (ec != std::errc{} || ptr != px.data() + px.size() || !std::isfinite(price)) {
            throw CsvError(describe_row(row) + ": cannot parse price '" + std::string(px) + "'", row);
        }
        if (price <= 0.0) {
            throw CsvError(describe_row(row) + ": non-positive price " + std::string(px), row);
        }
        obs.push_back({*key, std::string(ts), price});
    }

    std::vector<std::size_t> order(obs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return obs[a].key < obs[b].key; });
    std::vector<Observation> sorted;
    sorted.reserve(obs.size());
    for (std::size_t idx : order) {
        if (!sorted.empty() && sorted.back().key == obs[idx].key) {
            const long row = static_cast<long>(idx) + 1;
            throw CsvError(describe_row(row) + ": duplicate timestamp '" + obs[idx].label + "'", row);
        }
        sorted.push_back(std::move(obs[idx]));
    }
    return PriceSeries(std::move(sorted));
}

PriceSeries load_csv(const std::filesystem::path& path, const CsvColumns& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), columns);
}

std::string to_csv(const PriceSeries& series, const CsvColumns& columns) {
    std::string out = columns.timestamp + "," + columns.price + "\n";
    char buf[64];
    for (const auto& o : series.observations()) {
        std::snprintf(buf, sizeof buf, "%.17g", o.price);
        out += o.label;
        out += ',';
        out += buf;
        out += '\n';
    }
    return out;
}

std::vector<double> simple_returns(std::span<const double> prices) {
    if (prices.size() < 2) throw InvalidSeries("need at least 2 prices to form a return");
    std::vector<double> r(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) r[i] = prices[i + 1] / prices[i] - 1.0;
    return r;
}

ReturnSeries to_returns(const PriceSeries& series) {
    ReturnSeries out;
    out.returns = simple_returns(series.prices());
    out.labels.reserve(out.returns.size());
    for (std::size_t i = 1; i < series.size(); ++i) out.labels.push_back(series.observations()[i].label);
    return out;
}

}  // namespace pgprisk
