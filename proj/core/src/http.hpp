// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgqa::detail {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Blocking POST. Transport failures throw ProviderError; HTTP error statuses
/// are returned to the caller.
HttpResponse http_post(std::string_view url, const std::string& body, const std::string& content_type,
                       const HttpHeaders& headers, std::chrono::seconds timeout);

} // namespace kgqa::detail
