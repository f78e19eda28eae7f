// SPDX-License-Identifier: Apache-2.0
#include "kgqa/decimal.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace kgqa {

std::optional<Decimal> Decimal::parse(std::string_view text)
{
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-';
        ++i;
    }

    std::string digits;
    std::int64_t exponent = 0;
    bool any_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            any_digit = true;
            digits.push_back(c);
            if (seen_point)
                --exponent;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit)
        return std::nullopt;

    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        std::int64_t e = 0;
        const char* first = text.data() + i;
        const char* last = text.data() + text.size();
        if (first != last && *first == '+')
            ++first;
        auto [ptr, ec] = std::from_chars(first, last, e);
        if (ec != std::errc{} || ptr != last)
            return std::nullopt;
        exponent += e;
        i = text.size();
    }
    if (i != text.size())
        return std::nullopt;

    const auto lead = digits.find_first_not_of('0');
    if (lead == std::string::npos) {
        return Decimal{};
    }
    digits.erase(0, lead);
    while (!digits.empty() && digits.back() == '0') {
        digits.pop_back();
        ++exponent;
    }

    Decimal d;
    d.negative_ = negative;
    d.digits_ = std::move(digits);
    d.exponent_ = exponent;
    return d;
}

std::string Decimal::to_string() const
{
    if (is_zero())
        return "0";
    std::string out = negative_ ? "-" : "";
    const auto len = static_cast<std::int64_t>(digits_.size());
    if (exponent_ >= 0) {
        out += digits_;
        out.append(static_cast<std::size_t>(exponent_), '0');
    } else if (-exponent_ < len) {
        out += digits_.substr(0, static_cast<std::size_t>(len + exponent_));
        out += '.';
        out += digits_.substr(static_cast<std::size_t>(len + exponent_));
    } else {
        out += "0.";
        out.append(static_cast<std::size_t>(-exponent_ - len), '0');
        out += digits_;
    }
    return out;
}

namespace {

// Compares |a| and |b| for non-zero values.
std::strong_ordering compare_magnitude(const std::string& da, std::int64_t ea, const std::string& db, std::int64_t eb)
{
    // Position of the most significant digit.
    const std::int64_t ma = static_cast<std::int64_t>(da.size()) + ea;
    const std::int64_t mb = static_cast<std::int64_t>(db.size()) + eb;
    if (ma != mb)
        return ma <=> mb;
    const std::size_t n = std::max(da.size(), db.size());
    for (std::size_t k = 0; k < n; ++k) {
        const char ca = k < da.size() ? da[k] : '0';
        const char cb = k < db.size() ? db[k] : '0';
        if (ca != cb)
            return ca <=> cb;
    }
    return std::strong_ordering::equal;
}

} // namespace

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b)
{
    if (a.is_zero() || b.is_zero()) {
        const int sa = a.is_zero() ? 0 : (a.negative_ ? -1 : 1);
        const int sb = b.is_zero() ? 0 : (b.negative_ ? -1 : 1);
        return sa <=> sb;
    }
    if (a.negative_ != b.negative_)
        return a.negative_ ? std::strong_ordering::less : std::strong_ordering::greater;
    const auto mag = compare_magnitude(a.digits_, a.exponent_, b.digits_, b.exponent_);
    if (a.negative_)
        return 0 <=> mag;
    return mag;
}

} // namespace kgqa
