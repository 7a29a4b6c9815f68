#pragma once

// Binds a Service to a cpp-httplib server. Include httplib.h before this header.

#include <algorithm>
#include <cctype>
#include <string>

#include "bfdecide/service.hpp"

namespace bfd::service {

inline void mount(httplib::Server& server, Service& svc) {
    auto dispatch = [&svc](const httplib::Request& hreq, httplib::Response& hres) {
        Request req;
        req.method = hreq.method;
        req.path = hreq.path;
        req.body = hreq.body;
        for (const auto& [k, v] : hreq.params) req.query[k] = v;
        for (const auto& [k, v] : hreq.headers) {
            std::string lk = k;
            std::transform(lk.begin(), lk.end(), lk.begin(), [](unsigned char c) { return std::tolower(c); });
            req.headers[lk] = v;
        }
        const Response res = svc.handle(req);
        hres.status = res.status;
        for (const auto& [k, v] : res.headers) hres.set_header(k, v);
        hres.set_content(res.body, res.content_type);
    };
    const std::string any = R"(/.*)";
    server.Get(any, dispatch);
    server.Post(any, dispatch);
    server.Put(any, dispatch);
    server.Delete(any, dispatch);
}

} // namespace bfd::service
