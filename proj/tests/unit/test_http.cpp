#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "httplib.h"

#include "bfdecide/http.hpp"

using namespace bfd;
using bfd::io::json;

class HttpTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() / "bfdecide_http_test";
        std::filesystem::remove_all(dir_);
        store_ = std::make_unique<DocumentStore>(dir_);
        svc_ = std::make_unique<service::Service>(*store_, 7);
        service::mount(server_, *svc_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void TearDown() override {
        server_.stop();
        if (thread_.joinable()) thread_.join();
        std::filesystem::remove_all(dir_);
    }
    httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

    std::filesystem::path dir_;
    std::unique_ptr<DocumentStore> store_;
    std::unique_ptr<service::Service> svc_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

TEST_F(HttpTest, ComputeDecisionOverTheWire) {
    auto cli = client();
    const std::string body = R"({"bf":2.5,"p0":0.6,"kLower":1,"kUpper":1})";
    auto r = cli.Post("/compute/decision", body, "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->body, compute::decision(json::parse(body)).dump());
    EXPECT_EQ(json::parse(r->body).at("outcome"), "choose_a0");
    r = cli.Post("/compute/decision", "{oops", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 400);
}

TEST_F(HttpTest, DocumentRoutesAndHeaders) {
    auto cli = client();
    auto r = cli.Post("/analyses", R"({"id":"wire"})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 201);
    EXPECT_EQ(r->get_header_value("Location"), "/analyses/wire");
    EXPECT_EQ(r->get_header_value("ETag"), "\"1\"");

    httplib::Headers stale{{"If-Match", "\"5\""}};
    r = cli.Put("/analyses/wire/steps/1", stale, R"({"payload":{"a0":"x","a1":"y"}})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 409);
    httplib::Headers fresh{{"If-Match", "\"1\""}};
    r = cli.Put("/analyses/wire/steps/1", fresh, R"({"payload":{"a0":"x","a1":"y"}})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("ETag"), "\"2\"");

    r = cli.Get("/analyses/wire/report?format=markdown");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->body, workflow::render_report(store_->load("wire")));
    r = cli.Get("/analyses/missing");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 404);
}
