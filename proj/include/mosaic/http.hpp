#pragma once

#include <cstdlib>
#include <functional>
#include <memory>
#include <string>

namespace mosaic {

struct HttpResponse {
    int status = 0;  // 0 = transport failure (connect/timeout)
    std::string body;
};

// Transport hook: POST a JSON body to a path under the configured base URL.
// The pipeline only ever needs this one shape; tests inject lambdas, the CLI
// installs the real client from http_client.hpp.
using PostJsonFn =
    std::function<HttpResponse(const std::string& path, const std::string& body)>;

inline std::string api_key_from_env() {
    const char* key = std::getenv("MOSAIC_API_KEY");
    return key ? key : "";
}

}  // namespace mosaic
