#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "volcal/errors.hpp"

namespace volcal {

/// One observed European call quote. Immutable after construction.
struct Quote {
    std::string quote_id;
    std::string trade_date; ///< ISO-8601 YYYY-MM-DD
    double spot = 0.0;      ///< S
    double strike = 0.0;    ///< K
    double tau = 0.0;       ///< year fraction to expiry
    double rate = 0.0;      ///< continuously compounded annual rate
    double mid_price = 0.0; ///< observed call mid

    void validate() const {
        if (quote_id.empty()) throw InvalidInput("Quote: quote_id must be nonempty");
        if (!(spot > 0.0) || !std::isfinite(spot))
            throw InvalidInput("Quote " + quote_id + ": spot must be finite and > 0");
        if (!(strike > 0.0) || !std::isfinite(strike))
            throw InvalidInput("Quote " + quote_id + ": strike must be finite and > 0");
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw InvalidInput("Quote " + quote_id + ": tau must be finite and > 0");
        if (!std::isfinite(rate))
            throw InvalidInput("Quote " + quote_id + ": rate must be finite");
        if (!(mid_price >= 0.0) || !std::isfinite(mid_price))
            throw InvalidInput("Quote " + quote_id + ": mid_price must be finite and >= 0");
        // No-arbitrage upper bound for a call on a non-dividend asset.
        if (mid_price > spot)
            throw InvalidInput("Quote " + quote_id + ": mid_price exceeds spot");
    }
};

/// A dated collection of quotes in canonical (tau, strike, quote_id) order.
struct Dataset {
    std::string label;
    std::vector<Quote> quotes;

    bool empty() const { return quotes.empty(); }
    std::size_t size() const { return quotes.size(); }
};

namespace csv {

inline constexpr std::string_view kHeaderTau =
    "quote_id,trade_date,spot,strike,tau_years,rate,mid_price";
inline constexpr std::string_view kHeaderExpiry =
    "quote_id,trade_date,spot,strike,expiry,rate,mid_price";

inline std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline double parse_number(std::string_view field, std::size_t row, std::string_view name) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("row " + std::to_string(row) + ": malformed " + std::string(name) +
                         " '" + std::string(field) + "'");
    }
    return value;
}

struct CivilDate {
    int y = 0, m = 0, d = 0;
};

inline CivilDate parse_iso_date(std::string_view field, std::size_t row) {
    field = trim(field);
    auto fail = [&]() -> CivilDate {
        throw ParseError("row " + std::to_string(row) + ": malformed date '" +
                         std::string(field) + "' (expected YYYY-MM-DD)");
    };
    if (field.size() != 10 || field[4] != '-' || field[7] != '-') return fail();
    CivilDate date;
    auto read = [&](std::string_view s, int& out) {
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size()) fail();
    };
    read(field.substr(0, 4), date.y);
    read(field.substr(5, 2), date.m);
    read(field.substr(8, 2), date.d);
    static constexpr int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (date.y % 4 == 0 && date.y % 100 != 0) || date.y % 400 == 0;
    const int dim = (date.m == 2 && leap) ? 29 : (date.m >= 1 && date.m <= 12)
                        ? days_in_month[date.m - 1] : 0;
    if (date.m < 1 || date.m > 12 || date.d < 1 || date.d > dim) return fail();
    return date;
}

// Howard Hinnant's civil-days algorithm.
inline std::int64_t days_from_civil(const CivilDate& c) {
    const int y = c.y - (c.m <= 2);
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (c.m + (c.m > 2 ? -3 : 9)) + 2u) / 5u + c.d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline std::string format_number(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

} // namespace csv

/// Canonical ordering: (tau ascending, strike ascending, quote_id ascending).
inline void sort_canonical(std::vector<Quote>& quotes) {
    std::sort(quotes.begin(), quotes.end(), [](const Quote& a, const Quote& b) {
        if (a.tau != b.tau) return a.tau < b.tau;
        if (a.strike != b.strike) return a.strike < b.strike;
        return a.quote_id < b.quote_id;
    });
}

/// Parse a quote CSV. The schema is the fixed seven-column header; the
/// maturity column is either tau_years (year fraction, used as given) or
/// expiry (ISO date, converted at ACT/365 fixed). Every row is validated;
/// the first offending row or quote is named in the error. Row numbers are
/// 1-based counting the header as row 1.
inline Dataset parse_quotes(std::string_view csv_text, std::string label = {}) {
    std::size_t pos = 0;
    std::size_t row = 0;
    auto next_line = [&](std::string_view& line) -> bool {
        if (pos >= csv_text.size()) return false;
        const std::size_t nl = csv_text.find('\n', pos);
        if (nl == std::string_view::npos) {
            line = csv_text.substr(pos);
            pos = csv_text.size();
        } else {
            line = csv_text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        ++row;
        return true;
    };

    std::string_view header;
    if (!next_line(header)) throw ParseError("empty file");
    header = csv::trim(header);
    bool tau_column;
    if (header == csv::kHeaderTau) {
        tau_column = true;
    } else if (header == csv::kHeaderExpiry) {
        tau_column = false;
    } else {
        throw ParseError("row 1: unrecognized header '" + std::string(header) + "'");
    }

    Dataset ds;
    ds.label = std::move(label);
    std::set<std::string> seen_ids;
    std::string_view line;
    while (next_line(line)) {
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != 7) {
            throw ParseError("row " + std::to_string(row) + ": expected 7 fields, got " +
                             std::to_string(fields.size()));
        }
        Quote q;
        q.quote_id = std::string(csv::trim(fields[0]));
        const csv::CivilDate trade = csv::parse_iso_date(fields[1], row);
        q.trade_date = std::string(csv::trim(fields[1]));
        q.spot = csv::parse_number(fields[2], row, "spot");
        q.strike = csv::parse_number(fields[3], row, "strike");
        if (tau_column) {
            q.tau = csv::parse_number(fields[4], row, "tau_years");
        } else {
            const csv::CivilDate expiry = csv::parse_iso_date(fields[4], row);
            const std::int64_t days =
                csv::days_from_civil(expiry) - csv::days_from_civil(trade);
            if (days <= 0) {
                throw ParseError("row " + std::to_string(row) +
                                 ": expiry must be after trade_date");
            }
            q.tau = static_cast<double>(days) / 365.0;
        }
        q.rate = csv::parse_number(fields[5], row, "rate");
        q.mid_price = csv::parse_number(fields[6], row, "mid_price");
        try {
            q.validate();
        } catch (const InvalidInput& e) {
            throw ParseError("row " + std::to_string(row) + ": " + e.what());
        }
        if (!seen_ids.insert(q.quote_id).second) {
            throw ParseError("row " + std::to_string(row) + ": duplicate quote_id '" +
                             q.quote_id + "'");
        }
        if (!ds.quotes.empty() && q.trade_date != ds.quotes.front().trade_date) {
            throw ParseError("row " + std::to_string(row) +
                             ": trade_date differs from the rest of the file");
        }
        ds.quotes.push_back(std::move(q));
    }
    if (ds.quotes.empty()) throw ParseError("no data rows");
    sort_canonical(ds.quotes);
    return ds;
}

/// Canonical CSV form; parse(serialize(parse(x))) == parse(x) byte-for-byte.
inline std::string serialize_quotes(const Dataset& ds) {
    std::string out(csv::kHeaderTau);
    out.push_back('\n');
    for (const Quote& q : ds.quotes) {
        out += q.quote_id;
        out.push_back(',');
        out += q.trade_date;
        out.push_back(',');
        out += csv::format_number(q.spot);
        out.push_back(',');
        out += csv::format_number(q.strike);
        out.push_back(',');
        out += csv::format_number(q.tau);
        out.push_back(',');
        out += csv::format_number(q.rate);
        out.push_back(',');
        out += csv::format_number(q.mid_price);
        out.push_back('\n');
    }
    return out;
}

/// Deterministic in/out-of-sample partition: after canonical sorting,
/// even indices go in-sample, odd indices out. Balanced across strikes and
/// maturities without any randomness.
inline std::pair<Dataset, Dataset> split_in_out(const Dataset& ds) {
    if (ds.empty()) throw InvalidInput("split_in_out: dataset is empty");
    Dataset in{ds.label + "/in", {}};
    Dataset out{ds.label + "/out", {}};
    for (std::size_t i = 0; i < ds.quotes.size(); ++i) {
        (i % 2 == 0 ? in : out).quotes.push_back(ds.quotes[i]);
    }
    return {std::move(in), std::move(out)};
}

} // namespace volcal
