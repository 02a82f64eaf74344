#include "pmiris/service.hpp"

#include "../support/check.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>
#include <thread>

using namespace pmiris;

namespace {

const std::filesystem::path kFixture = PMIRIS_FIXTURE_DIR;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string image_bytes(const std::string& id) { return slurp(kFixture / "images" / (id + ".png")); }
std::string mask_bytes(const std::string& id) { return slurp(kFixture / "masks" / (id + ".png")); }

Json body(const Reply& r) { return Json::parse(r.body); }

std::string upload_id(Service& s, const std::string& sample, bool with_mask = true) {
    const auto r = s.upload(image_bytes(sample), with_mask ? std::optional(mask_bytes(sample)) : std::nullopt, std::nullopt);
    REQUIRE(r.status == 200);
    return body(r)["image_id"].get<std::string>();
}

}  // namespace

TEST_CASE("health reports ok") {
    testutil::TempDir dir;
    Service s(ServiceConfig{dir.path, {}, {}, {}});
    const auto r = s.health();
    CHECK(r.status == 200);
    CHECK(body(r)["status"] == "ok");
}

TEST_CASE("uploads are content addressed and persisted") {
    testutil::TempDir dir;
    Service s(ServiceConfig{dir.path, {}, {}, {}});
    const auto a = upload_id(s, "S01_left_1");
    CHECK(upload_id(s, "S01_left_1") == a);
    CHECK(upload_id(s, "S01_left_1", false) != a);
    CHECK(std::filesystem::exists(dir.path / "images" / a / "image.bin"));
    CHECK(std::filesystem::exists(dir.path / "images" / a / "mask.bin"));

    const auto bad = s.upload("not an image", std::nullopt, std::nullopt);
    CHECK(bad.status == 400);
    CHECK(body(bad)["error_code"] == "UnsupportedFormat");
    CHECK(s.upload("", std::nullopt, std::nullopt).status == 400);

    const auto meta = s.upload(image_bytes("S01_left_2"), std::nullopt, R"({"sample_id": "x"})");
    CHECK(meta.status == 400);
    CHECK(body(meta)["error_code"] == "MissingField");
}

TEST_CASE("compare returns all encoders and a fresh instance reloads uploads") {
    testutil::TempDir dir;
    std::string a, b, cid;
    Json first;
    {
        Service s(ServiceConfig{dir.path, {}, {}, {}});
        a = upload_id(s, "S01_left_1");
        b = upload_id(s, "S01_left_2");
        const auto r = s.compare(Json{{"image_id_a", a}, {"image_id_b", b}}.dump());
        REQUIRE(r.status == 200);
        first = body(r);
        cid = first["comparison_id"].get<std::string>();
        REQUIRE(first["results"].size() == 3u);
        for (const auto& res : first["results"]) {
            CHECK(res["ftm"] == false);
            CHECK(res["score"].get<double>() < 0.2);
            CHECK(res["heatmap_url"] == "/v1/heatmap/" + cid + "/" + res["encoder"].get<std::string>());
        }
        CHECK(first["quality_a"]["USABLE_IRIS_AREA"].get<double>() > 50);

        const auto png = s.heatmap(cid, "gabor2d");
        CHECK(png.status == 200);
        CHECK(png.content_type == "image/png");
        CHECK(png.body.substr(1, 3) == "PNG");
        CHECK(s.heatmap("0000000000000000", "gabor2d").status == 404);
        CHECK(s.heatmap(cid, "nope").status == 400);
    }
    Service again(ServiceConfig{dir.path, {}, {}, {}});
    const auto r = again.compare(Json{{"image_id_a", a}, {"image_id_b", b}}.dump());
    REQUIRE(r.status == 200);
    CHECK(body(r)["results"] == first["results"]);
}

TEST_CASE("compare validates its request") {
    testutil::TempDir dir;
    Service s(ServiceConfig{dir.path, {}, {}, {}});
    const auto a = upload_id(s, "S01_left_1");
    CHECK(s.compare("{").status == 400);
    CHECK(body(s.compare("[]"))["error_code"] == "SchemaMismatch");
    CHECK(body(s.compare(Json{{"image_id_a", a}}.dump()))["error_code"] == "MissingField");
    const auto missing = s.compare(Json{{"image_id_a", a}, {"image_id_b", "ffffffffffffffff"}}.dump());
    CHECK(missing.status == 404);
    CHECK(body(missing)["error_code"] == "NotFound");
    CHECK(s.compare(Json{{"image_id_a", a}, {"image_id_b", "../../etc"}}.dump()).status == 404);
    const auto one = s.compare(Json{{"image_id_a", a}, {"image_id_b", a}, {"encoders", {"bif"}}}.dump());
    REQUIRE(one.status == 200);
    REQUIRE(body(one)["results"].size() == 1u);
    CHECK(body(one)["results"][0]["score"] == 0.0);
    CHECK(s.compare(Json{{"image_id_a", a}, {"image_id_b", a}, {"encoders", {"hog"}}}.dump()).status == 400);
}

TEST_CASE("blank images are failures to match with null quality") {
    testutil::TempDir dir;
    Service s(ServiceConfig{dir.path, {}, {}, {}});
    const auto blank_png = encode_png_gray(320, 240, std::vector<std::uint8_t>(320 * 240, 0));
    const auto up = s.upload(std::string(blank_png.begin(), blank_png.end()), std::nullopt, std::nullopt);
    REQUIRE(up.status == 200);
    const auto blank = body(up)["image_id"].get<std::string>();
    const auto a = upload_id(s, "S01_left_1");
    const auto r = body(s.compare(Json{{"image_id_a", blank}, {"image_id_b", a}}.dump()));
    for (const auto& res : r["results"]) {
        CHECK(res["ftm"] == true);
        CHECK(res["score"].is_null());
        CHECK(res["heatmap_url"].is_null());
    }
    CHECK(r["quality_a"].is_null());
    const auto q = s.quality(blank);
    CHECK(q.status == 422);
    CHECK(body(q)["error_code"] == "NoBoundaryFound");
    CHECK(s.quality(a).status == 200);
    CHECK(body(s.quality(a))["quality"].contains("SHARPNESS"));
}

TEST_CASE("identify sees gallery changes made after start-up") {
    testutil::TempDir dir;
    Service s(ServiceConfig{dir.path, {}, {}, {}});
    const auto probe = upload_id(s, "S02_right_2");
    auto r = body(s.identify(Json{{"image_id", probe}}.dump()));
    CHECK(r["candidates"].empty());

    {
        Gallery g(dir.path / "gallery");
        for (const char* id : {"S01_left_1", "S02_right_1", "S01_left_3"}) {
            const auto eye = load_capture(kFixture / "images" / (std::string(id) + ".png"),
                                          kFixture / "masks" / (std::string(id) + ".png"), SourceChannel::nir);
            SampleMetadata m;
            m.sample_id = id;
            m.subject_id = std::string(id).substr(0, 3);
            g.enroll(s.pipeline().encode(eye, EncoderId::gabor2d), m);
        }
    }
    // coarse filesystem clocks: make sure the index stamp differs
    std::filesystem::last_write_time(dir.path / "gallery" / "index.json",
                                     std::filesystem::file_time_type::clock::now() + std::chrono::seconds(2));
    r = body(s.identify(Json{{"image_id", probe}, {"k", 2}}.dump()));
    REQUIRE(r["candidates"].size() == 2u);
    CHECK(r["candidates"][0]["sample_id"] == "S02_right_1");
    CHECK(r["candidates"][0]["rank"] == 1);
    CHECK(r["ftm"] == false);

    CHECK(s.identify(Json{{"image_id", probe}, {"k", 0}}.dump()).status == 400);
    CHECK(s.identify(Json{{"image_id", probe}, {"k", "3"}}.dump()).status == 400);
    CHECK(s.identify(Json{{"image_id", probe}, {"encoder", "bif"}}.dump()).status == 200);
}

TEST_CASE("status mapping") {
    CHECK(http_status_for(ErrorCode::NotFound) == 404);
    CHECK(http_status_for(ErrorCode::NoBoundaryFound) == 422);
    CHECK(http_status_for(ErrorCode::StorageFailure) == 500);
    CHECK(http_status_for(ErrorCode::SchemaMismatch) == 400);
}

TEST_CASE("HTTP round trip") {
    testutil::TempDir dir;
    Service s(ServiceConfig{dir.path, {}, {}, {}});
    httplib::Server server;
    s.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client cli("127.0.0.1", port);
    auto health = cli.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);

    auto upload = [&](const std::string& id) {
        httplib::MultipartFormDataItems items = {
            {"image", image_bytes(id), id + ".png", "image/png"},
            {"mask", mask_bytes(id), id + "-mask.png", "image/png"},
        };
        auto res = cli.Post("/v1/images", items);
        REQUIRE(res);
        REQUIRE(res->status == 200);
        return Json::parse(res->body)["image_id"].get<std::string>();
    };
    const auto a = upload("S01_left_1");
    const auto b = upload("S02_right_1");
    auto cmp = cli.Post("/v1/compare", Json{{"image_id_a", a}, {"image_id_b", b}}.dump(), "application/json");
    REQUIRE(cmp);
    CHECK(cmp->status == 200);
    const auto direct = s.compare(Json{{"image_id_a", a}, {"image_id_b", b}}.dump());
    CHECK(Json::parse(cmp->body) == body(direct));

    auto q = cli.Get("/v1/quality/" + a);
    REQUIRE(q);
    CHECK(q->status == 200);
    auto png = cli.Get("/v1/heatmap/" + Json::parse(cmp->body)["comparison_id"].get<std::string>() + "/bif");
    REQUIRE(png);
    CHECK(png->status == 200);
    CHECK(png->get_header_value("Content-Type") == "image/png");

    auto nf = cli.Get("/v1/nowhere");
    REQUIRE(nf);
    CHECK(nf->status == 404);
    CHECK(Json::parse(nf->body)["error_code"] == "NotFound");

    auto no_form = cli.Post("/v1/images", "x", "text/plain");
    REQUIRE(no_form);
    CHECK(no_form->status == 400);

    auto big = cli.Post("/v1/compare", std::string(kMaxUploadBytes + 10, ' '), "application/json");
    REQUIRE(big);
    CHECK(big->status == 413);
    CHECK(Json::parse(big->body)["error_code"] == "PayloadTooLarge");

    server.stop();
    th.join();
}
