#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dcaa/model.hpp"

namespace dcaa {

using Date = std::chrono::year_month_day;

// Rows [begin, end] of one rebalancing period; S_b is row `begin`, S_e is row `end`.
struct Period {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
};

/// Daily closing prices, one column per ticker. Periods are calendar months.
class PricePanel {
public:
    PricePanel(std::vector<std::string> tickers, std::vector<Date> dates, Matrix prices);

    Eigen::Index m() const { return prices_.cols(); }
    Eigen::Index size() const { return prices_.rows(); }
    const std::vector<std::string>& tickers() const { return tickers_; }
    const std::vector<Date>& dates() const { return dates_; }
    const Matrix& prices() const { return prices_; }
    const std::vector<Period>& periods() const { return periods_; }

    Vector period_open(std::size_t k) const;
    Vector period_close(std::size_t k) const;

    // Daily log-returns, (T-1) x m.
    Matrix log_returns() const;

    // Rows [begin, end).
    PricePanel rows(Eigen::Index begin, Eigen::Index end) const;

private:
    std::vector<std::string> tickers_;
    std::vector<Date> dates_;
    Matrix prices_;
    std::vector<Period> periods_;
};

Date parse_date(std::string_view text);
std::string format_date(const Date& d);

// CSV with header `date,<ticker>,...`; `source` names the input in error messages.
PricePanel parse_prices(std::istream& in, std::string_view source = "<input>");
PricePanel load_prices(const std::filesystem::path& path);

}  // namespace dcaa
