#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace evopat::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct Response {
    int status = 0; // 0 means the request never reached the server
    std::string body;
    std::map<std::string, std::string> headers;
    std::string error;

    bool transport_failed() const { return status == 0; }
};

Response post_json(const std::string& url, const std::string& json_body,
                   const Headers& headers, int timeout_seconds);

Response get(const std::string& url, const Headers& headers, int timeout_seconds);

} // namespace evopat::http
