#include "dcaa/prices.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "dcaa/error.hpp"

namespace dcaa {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto comma = line.find(',');
        out.push_back(trim(line.substr(0, comma)));
        if (comma == std::string_view::npos) return out;
        line.remove_prefix(comma + 1);
    }
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_missing(std::string_view s) { return s.empty() || s == "NA" || s == "NaN" || s == "null"; }

}  // namespace

Date parse_date(std::string_view text) {
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    const bool shape = text.size() == 10 && text[4] == '-' && text[7] == '-';
    if (!shape || !parse_number(text.substr(0, 4), y) || !parse_number(text.substr(5, 2), mo) ||
        !parse_number(text.substr(8, 2), d))
        throw Error(ErrorKind::Data, fmt::format("invalid ISO date '{}'", text));
    const Date date{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    require(date.ok(), ErrorKind::Data, fmt::format("invalid ISO date '{}'", text));
    return date;
}

std::string format_date(const Date& d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                       static_cast<unsigned>(d.day()));
}

PricePanel::PricePanel(std::vector<std::string> tickers, std::vector<Date> dates, Matrix prices)
    : tickers_(std::move(tickers)), dates_(std::move(dates)), prices_(std::move(prices)) {
    require(!tickers_.empty(), ErrorKind::Data, "price panel needs at least one ticker");
    require(prices_.cols() == static_cast<Eigen::Index>(tickers_.size()) &&
                prices_.rows() == static_cast<Eigen::Index>(dates_.size()),
            ErrorKind::DimensionMismatch, "price matrix does not match tickers and dates");
    require(!dates_.empty(), ErrorKind::Data, "price panel is empty");
    for (std::size_t i = 1; i < dates_.size(); ++i)
        require(dates_[i - 1] < dates_[i], ErrorKind::Data,
                fmt::format("dates not strictly increasing at {}", format_date(dates_[i])));
    require((prices_.array() > 0.0).all() && prices_.allFinite(), ErrorKind::Data, "prices must be positive");

    Eigen::Index begin = 0;
    for (Eigen::Index t = 1; t <= size(); ++t) {
        const auto idx = static_cast<std::size_t>(t);
        if (t == size() || dates_[idx].year() != dates_[idx - 1].year() || dates_[idx].month() != dates_[idx - 1].month()) {
            periods_.push_back({begin, t - 1});
            begin = t;
        }
    }
}

Vector PricePanel::period_open(std::size_t k) const { return prices_.row(periods_.at(k).begin).transpose(); }

Vector PricePanel::period_close(std::size_t k) const { return prices_.row(periods_.at(k).end).transpose(); }

Matrix PricePanel::log_returns() const {
    const Eigen::Index n = size() - 1;
    if (n <= 0) return Matrix(0, m());
    return (prices_.bottomRows(n).array() / prices_.topRows(n).array()).log().matrix();
}

PricePanel PricePanel::rows(Eigen::Index begin, Eigen::Index end) const {
    require(0 <= begin && begin < end && end <= size(), ErrorKind::InvalidArgument, "row range out of bounds");
    return PricePanel(tickers_, std::vector<Date>(dates_.begin() + begin, dates_.begin() + end),
                      prices_.middleRows(begin, end - begin));
}

PricePanel parse_prices(std::istream& in, std::string_view source) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        return Error(ErrorKind::Data, fmt::format("{}:{}: {}", source, line_no, what));
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw fail("missing header");
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "date") throw fail("header must be 'date,<ticker>,...'");
    std::vector<std::string> tickers;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw fail("empty ticker name");
        tickers.emplace_back(header[j]);
    }

    std::vector<Date> dates;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw fail(fmt::format("expected {} fields, found {}", header.size(), fields.size()));
        Date date;
        try {
            date = parse_date(fields[0]);
        } catch (const Error& e) {
            throw fail(e.what());
        }
        if (!dates.empty() && !(dates.back() < date))
            throw fail(fmt::format("date {} is not after {}", format_date(date), format_date(dates.back())));
        dates.push_back(date);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            if (is_missing(fields[j])) throw fail(fmt::format("missing price for {}", tickers[j - 1]));
            double v = 0.0;
            if (!parse_number(fields[j], v)) throw fail(fmt::format("malformed price '{}'", fields[j]));
            if (!(v > 0.0) || !std::isfinite(v)) throw fail(fmt::format("non-positive price for {}", tickers[j - 1]));
            flat.push_back(v);
        }
    }
    if (dates.empty()) throw fail("no price rows");
    const auto rows = static_cast<Eigen::Index>(dates.size());
    const auto cols = static_cast<Eigen::Index>(tickers.size());
    Matrix prices = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), rows, cols);
    return PricePanel(std::move(tickers), std::move(dates), std::move(prices));
}

PricePanel load_prices(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
    return parse_prices(in, path.string());
}

}  // namespace dcaa
