// SPDX-License-Identifier: Apache-2.0
#include "kgqa/error.hpp"

#include <fmt/format.h>

namespace kgqa {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnboundRef: return "UnboundRef";
    case ErrorCode::CyclicRef: return "CyclicRef";
    case ErrorCode::UnboundAtom: return "UnboundAtom";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnsupportedForm: return "UnsupportedForm";
    case ErrorCode::QueryParseError: return "QueryParseError";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::ResolveError: return "ResolveError";
    case ErrorCode::UnknownSchemaItem: return "UnknownSchemaItem";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::GrammarError: return "GrammarError";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::UnknownQid: return "UnknownQid";
    case ErrorCode::MissingDescription: return "MissingDescription";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, std::optional<std::size_t> position)
{
    if (position)
        return fmt::format("{} at {}: {}", to_string(code), *position, message);
    return fmt::format("{}: {}", to_string(code), message);
}

} // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> position)
    : std::runtime_error(compose(code, message, position)), code_(code), position_(position), detail_(message)
{
}

} // namespace kgqa
