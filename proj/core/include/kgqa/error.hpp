// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kgqa {

enum class ErrorCode {
    SyntaxError,
    ArityError,
    TypeMismatch,
    UnboundRef,
    CyclicRef,
    UnboundAtom,
    ParseError,
    SchemaViolation,
    UnsupportedForm,
    QueryParseError,
    ProviderError,
    EmptyCandidates,
    EmptyTarget,
    ResolveError,
    UnknownSchemaItem,
    UnknownVariable,
    UnknownRelation,
    UnknownAction,
    GrammarError,
    UnknownProfile,
    UnknownQid,
    MissingDescription,
    ConfigError,
    IoError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `position` carries a byte offset for
/// syntax errors and a 1-based line number for file/grammar errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> position = std::nullopt);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::optional<std::size_t> position() const noexcept { return position_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> position_;
    std::string detail_;
};

} // namespace kgqa
