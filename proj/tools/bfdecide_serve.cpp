// HTTP front end for the analysis service.
//
//   bfdecide_serve --store ./analyses --host 127.0.0.1 --port 8080

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"

#include "bfdecide/http.hpp"

int main(int argc, char** argv) {
    CLI::App app{"bfdecide analysis service"};
    std::string store_dir = "analyses", host = "127.0.0.1";
    int port = 8080;
    app.add_option("--store", store_dir, "Document store directory");
    app.add_option("--host", host, "Listen address");
    app.add_option("--port", port, "Listen port");
    CLI11_PARSE(app, argc, argv);

    bfd::DocumentStore store(store_dir);
    bfd::service::Service svc(store);
    httplib::Server server;

    bfd::service::mount(server, svc);

    std::cout << "listening on http://" << host << ":" << port << " (store " << store_dir << ")" << std::endl;
    if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}
