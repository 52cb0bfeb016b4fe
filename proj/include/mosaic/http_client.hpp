#pragma once

// Real HTTP transport. Kept out of http.hpp so the library headers stay
// lightweight; only the CLI and the wire-protocol tests include this.

#include <httplib.h>

// httplib drags in <resolv.h>, whose _res macro corrupts Eigen headers
// included later in the same translation unit.
#ifdef _res
#undef _res
#endif

#include <string>

#include "mosaic/http.hpp"

namespace mosaic {

// Builds a PostJsonFn bound to `base_url` (e.g. "http://localhost:8089").
// Sends Authorization: Bearer $MOSAIC_API_KEY when the variable is set.
// Plain HTTP only; an https URL fails with a transport error.
inline PostJsonFn make_http_poster(const std::string& base_url, int timeout_s = 60) {
    std::string bearer = api_key_from_env();
    return [base_url, bearer, timeout_s](const std::string& path,
                                         const std::string& body) -> HttpResponse {
        httplib::Client cli(base_url);
        cli.set_connection_timeout(timeout_s, 0);
        cli.set_read_timeout(timeout_s, 0);
        cli.set_write_timeout(timeout_s, 0);
        httplib::Headers headers;
        if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
        auto res = cli.Post(path, headers, body, "application/json");
        if (!res) return {0, "transport error: " + to_string(res.error())};
        return {res->status, res->body};
    };
}

}  // namespace mosaic
