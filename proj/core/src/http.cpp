// SPDX-License-Identifier: Apache-2.0
#include "http.hpp"

#include "kgqa/error.hpp"

#include <fmt/format.h>
#include <httplib.h>

namespace kgqa::detail {

namespace {

struct UrlParts {
    std::string origin; // scheme://host[:port]
    std::string path;
};

UrlParts split_url(std::string_view url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos)
        throw Error(ErrorCode::ConfigError, fmt::format("endpoint URL '{}' has no scheme", url));
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos)
        return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

} // namespace

HttpResponse http_post(std::string_view url, const std::string& body, const std::string& content_type,
                       const HttpHeaders& headers, std::chrono::seconds timeout)
{
    const UrlParts parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers h;
    for (const auto& [k, v] : headers)
        h.emplace(k, v);
    auto res = client.Post(parts.path, h, body, content_type);
    if (!res)
        throw Error(ErrorCode::ProviderError,
                    fmt::format("POST {} failed: {}", url, httplib::to_string(res.error())));
    return {res->status, res->body};
}

} // namespace kgqa::detail
