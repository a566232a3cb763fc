#include "evopat/http_client.hpp"

#include <httplib.h>

namespace evopat::http {

namespace {

// "http://host:port/path?query" -> ("http://host:port", "/path?query")
std::pair<std::string, std::string> split_url(const std::string& url) {
    const std::size_t scheme = url.find("://");
    const std::size_t path_begin =
        url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_begin == std::string::npos) return {url, "/"};
    return {url.substr(0, path_begin), url.substr(path_begin)};
}

Response to_response(const httplib::Result& result) {
    Response response;
    if (!result) {
        response.error = httplib::to_string(result.error());
        return response;
    }
    response.status = result->status;
    response.body = result->body;
    for (const auto& [key, value] : result->headers) {
        response.headers[key] = value;
    }
    return response;
}

httplib::Headers to_httplib(const Headers& headers) {
    httplib::Headers out;
    for (const auto& [key, value] : headers) out.emplace(key, value);
    return out;
}

} // namespace

Response post_json(const std::string& url, const std::string& json_body,
                   const Headers& headers, int timeout_seconds) {
    const auto [base, path] = split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    return to_response(client.Post(path, to_httplib(headers), json_body, "application/json"));
}

Response get(const std::string& url, const Headers& headers, int timeout_seconds) {
    const auto [base, path] = split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    return to_response(client.Get(path, to_httplib(headers)));
}

} // namespace evopat::http
