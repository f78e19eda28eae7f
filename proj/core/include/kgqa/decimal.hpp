// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kgqa {

/// Exact decimal number parsed from a lexical form such as "980.0", "-1.5e3"
/// or "42". Value is sign * digits * 10^exponent with no leading or trailing
/// zeros in `digits`, so integers and floats compare by value after promotion.
class Decimal {
public:
    Decimal() = default;

    static std::optional<Decimal> parse(std::string_view lexical);

    [[nodiscard]] bool is_zero() const noexcept { return digits_.empty(); }
    [[nodiscard]] bool negative() const noexcept { return negative_; }
    [[nodiscard]] std::string to_string() const;

    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);
    friend bool operator==(const Decimal& a, const Decimal& b) { return (a <=> b) == 0; }

private:
    bool negative_ = false;
    std::string digits_;      // most significant first
    std::int64_t exponent_ = 0;
};

} // namespace kgqa
