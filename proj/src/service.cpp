#include "pmiris/service.hpp"

#include "pmiris/error.hpp"
#include "pmiris/hash.hpp"
#include "pmiris/version.hpp"

#include <httplib.h>

#include <fstream>

namespace fs = std::filesystem;

namespace pmiris {

namespace {

constexpr EncoderId kAllEncoders[] = {EncoderId::gabor2d, EncoderId::loggabor1d, EncoderId::bif};

Reply json_reply(const Json& j, int status = 200) { return Reply{status, "application/json", j.dump()}; }

std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

Json parse_body(const std::string& body) {
    try {
        Json j = Json::parse(body);
        if (!j.is_object()) throw Error(ErrorCode::SchemaMismatch, "request body must be a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, std::string("malformed JSON: ") + e.what());
    }
}

std::string string_field(const Json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::MissingField, std::string("missing field '") + key + "'");
    if (!j[key].is_string()) throw Error(ErrorCode::SchemaMismatch, std::string("field '") + key + "' must be a string");
    return j[key].get<std::string>();
}

bool valid_hex_id(const std::string& id) {
    return id.size() == 16 && std::all_of(id.begin(), id.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

template <class F>
Reply guarded(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        return error_reply(http_status_for(e.code()), e.code(), e.what());
    } catch (const std::exception& e) {
        Json j{{"error_code", "Internal"}, {"message", e.what()}};
        return json_reply(j, 500);
    }
}

}  // namespace

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::NoBoundaryFound:
        case ErrorCode::DegenerateGeometry:
        case ErrorCode::OutOfFrame:
        case ErrorCode::EmptyUsableArea: return 422;
        case ErrorCode::StorageFailure:
        case ErrorCode::Io: return 500;
        default: return 400;
    }
}

Reply error_reply(int status, ErrorCode code, const std::string& message) {
    return json_reply(Json{{"error_code", to_string(code)}, {"message", message}}, status);
}

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)), pipeline_(cfg_.pipeline) {
    if (cfg_.gallery_dir.empty()) cfg_.gallery_dir = cfg_.data_dir / "gallery";
    std::error_code ec;
    fs::create_directories(cfg_.data_dir / "images", ec);
    if (ec) throw Error(ErrorCode::StorageFailure, "cannot create " + cfg_.data_dir.string() + ": " + ec.message());
    gallery_ = std::make_shared<Gallery>(cfg_.gallery_dir);
    gallery_stamp_ = fs::last_write_time(cfg_.gallery_dir / "index.json", ec);
}

Reply Service::health() const { return json_reply(Json{{"status", "ok"}, {"version", kVersion}}); }

Reply Service::upload(const std::string& image_bytes, const std::optional<std::string>& mask_bytes,
                      const std::optional<std::string>& metadata_json) {
    return guarded([&] {
        if (image_bytes.empty()) throw Error(ErrorCode::MissingField, "missing 'image' part");
        Fnv1a64 h;
        h.update(std::string_view(image_bytes));
        if (mask_bytes) {
            h.update(std::string_view("\0mask", 5));
            h.update(std::string_view(*mask_bytes));
        }
        const std::string id = to_hex(h.digest());

        // Decode before storing so that bad uploads leave nothing behind.
        auto stored = std::make_shared<Stored>(Stored{
            EyeCapture{decode_image(as_bytes(image_bytes), cfg_.pipeline.channel, id), std::nullopt}, std::nullopt});
        if (mask_bytes) {
            stored->eye.mask = decode_image(as_bytes(*mask_bytes), SourceChannel::nir, id + "-mask");
            if (stored->eye.mask->width() != stored->eye.image.width() ||
                stored->eye.mask->height() != stored->eye.image.height()) {
                throw Error(ErrorCode::DimensionMismatch, "mask dimensions differ from the image");
            }
        }
        if (metadata_json) stored->meta = metadata_from_json(parse_body(*metadata_json));

        std::lock_guard lock(mu_);
        if (!images_.count(id)) {
            const fs::path dir = cfg_.data_dir / "images" / id;
            fs::create_directories(dir);
            write_file_bytes(dir / "image.bin", as_bytes(image_bytes));
            if (mask_bytes) write_file_bytes(dir / "mask.bin", as_bytes(*mask_bytes));
            if (stored->meta) {
                std::ofstream(dir / "metadata.json") << to_json(*stored->meta).dump(2) << '\n';
            }
            images_.emplace(id, std::move(stored));
        }
        return json_reply(Json{{"image_id", id}});
    });
}

std::shared_ptr<const Service::Stored> Service::find_image(const std::string& id) {
    {
        std::lock_guard lock(mu_);
        if (auto it = images_.find(id); it != images_.end()) return it->second;
    }
    const fs::path dir = cfg_.data_dir / "images" / id;
    if (!valid_hex_id(id) || !fs::exists(dir / "image.bin")) {
        throw Error(ErrorCode::NotFound, "unknown image_id '" + id + "'");
    }
    auto stored = std::make_shared<Stored>(
        Stored{EyeCapture{decode_image(read_file_bytes(dir / "image.bin"), cfg_.pipeline.channel, id), std::nullopt},
               std::nullopt});
    if (fs::exists(dir / "mask.bin")) {
        stored->eye.mask = decode_image(read_file_bytes(dir / "mask.bin"), SourceChannel::nir, id + "-mask");
    }
    if (fs::exists(dir / "metadata.json")) {
        std::ifstream in(dir / "metadata.json");
        stored->meta = metadata_from_json(Json::parse(in));
    }
    std::lock_guard lock(mu_);
    return images_.emplace(id, std::move(stored)).first->second;
}

std::shared_ptr<const EncodeOutcome> Service::template_for(const std::string& id, EncoderId enc) {
    const auto key = std::make_pair(id, enc);
    {
        std::lock_guard lock(mu_);
        if (auto it = templates_.find(key); it != templates_.end()) return it->second;
    }
    const auto img = find_image(id);
    auto outcome = std::make_shared<const EncodeOutcome>(pipeline_.try_encode(img->eye, enc));
    std::lock_guard lock(mu_);
    return templates_.emplace(key, std::move(outcome)).first->second;
}

std::optional<QualityRecord> Service::quality_for(const std::string& id) {
    const auto img = find_image(id);
    try {
        const auto seg = pipeline_.segment(img->eye);
        return compute_quality(img->eye.image, seg, cfg_.quality);
    } catch (const Error& e) {
        if (is_pipeline_failure(e.code())) return std::nullopt;
        throw;
    }
}

Reply Service::compare(const std::string& request_body) {
    return guarded([&] {
        const Json req = parse_body(request_body);
        const std::string a = string_field(req, "image_id_a");
        const std::string b = string_field(req, "image_id_b");
        std::vector<EncoderId> encoders;
        if (req.contains("encoders")) {
            if (!req["encoders"].is_array()) throw Error(ErrorCode::SchemaMismatch, "'encoders' must be a list");
            for (const auto& e : req["encoders"]) {
                if (!e.is_string()) throw Error(ErrorCode::SchemaMismatch, "encoder names must be strings");
                encoders.push_back(parse_encoder_id(e.get<std::string>()));
            }
        } else {
            encoders.assign(std::begin(kAllEncoders), std::end(kAllEncoders));
        }
        find_image(a);
        find_image(b);

        Fnv1a64 h;
        h.update(std::string_view(a));
        h.update(std::string_view("/"));
        h.update(std::string_view(b));
        const std::string cid = to_hex(h.digest());
        {
            std::lock_guard lock(mu_);
            comparisons_[cid] = {a, b};
        }

        Json results = Json::array();
        for (const auto enc : encoders) {
            const auto ta = template_for(a, enc);
            const auto tb = template_for(b, enc);
            const auto outcome = pipeline_.compare(*ta, *tb);
            Json r = pair_outcome_json(enc, outcome);
            r["heatmap_url"] = outcome.ftm ? Json(nullptr) : Json("/v1/heatmap/" + cid + "/" + to_string(enc));
            results.push_back(std::move(r));
        }
        const auto qa = quality_for(a);
        const auto qb = quality_for(b);
        return json_reply(Json{{"comparison_id", cid},
                               {"image_id_a", a},
                               {"image_id_b", b},
                               {"results", results},
                               {"quality_a", qa ? to_json(*qa) : Json(nullptr)},
                               {"quality_b", qb ? to_json(*qb) : Json(nullptr)}});
    });
}

std::shared_ptr<Gallery> Service::gallery() {
    std::lock_guard lock(gallery_mu_);
    std::error_code ec;
    const auto stamp = fs::last_write_time(cfg_.gallery_dir / "index.json", ec);
    if (!ec && stamp != gallery_stamp_) {
        gallery_ = std::make_shared<Gallery>(cfg_.gallery_dir);
        gallery_stamp_ = stamp;
    }
    return gallery_;
}

Reply Service::identify(const std::string& request_body) {
    return guarded([&] {
        const Json req = parse_body(request_body);
        const std::string id = string_field(req, "image_id");
        const EncoderId enc = req.contains("encoder") ? parse_encoder_id(string_field(req, "encoder")) : EncoderId::gabor2d;
        std::size_t k = 10;
        if (req.contains("k")) {
            if (!req["k"].is_number_integer() || req["k"].get<long long>() < 1) {
                throw Error(ErrorCode::SchemaMismatch, "'k' must be a positive integer");
            }
            k = req["k"].get<std::size_t>();
        }
        const auto probe = template_for(id, enc);
        Json out{{"image_id", id}, {"encoder", to_string(enc)}, {"k", k}};
        if (const auto* f = std::get_if<PipelineFailure>(probe.get())) {
            out["ftm"] = true;
            out["error_code"] = to_string(f->code);
            out["candidates"] = Json::array();
            return json_reply(out);
        }
        const auto& t = std::get<IrisTemplate>(*probe);
        const auto res = gallery()->identify(t, k, pipeline_.template_max_shift(enc), cfg_.pipeline.overlap_floor);
        out.update(identify_json(res, angular_stride(enc, cfg_.pipeline.gabor)));
        return json_reply(out);
    });
}

Reply Service::quality(const std::string& image_id) {
    return guarded([&] {
        const auto img = find_image(image_id);
        const auto seg = pipeline_.segment(img->eye);
        Json j = to_json(compute_quality(img->eye.image, seg, cfg_.quality));
        return json_reply(Json{{"image_id", image_id}, {"quality", j}, {"segmentation", segmentation_json(seg)}});
    });
}

Reply Service::heatmap(const std::string& comparison_id, const std::string& encoder) {
    return guarded([&] {
        std::pair<std::string, std::string> ids;
        {
            std::lock_guard lock(mu_);
            auto it = comparisons_.find(comparison_id);
            if (it == comparisons_.end()) throw Error(ErrorCode::NotFound, "unknown comparison '" + comparison_id + "'");
            ids = it->second;
        }
        const EncoderId enc = parse_encoder_id(encoder);
        const auto ta = template_for(ids.first, enc);
        const auto tb = template_for(ids.second, enc);
        const auto outcome = pipeline_.compare(*ta, *tb);
        if (outcome.ftm) throw Error(ErrorCode::NotFound, "no heatmap for a failed comparison");
        const auto& a = std::get<IrisTemplate>(*ta);
        const auto& b = std::get<IrisTemplate>(*tb);
        const auto hm = similarity_heatmap(a, b, outcome.match->best_shift);
        const auto png = encode_png_gray(hm.cols, hm.rows, heatmap_gray(hm));
        return Reply{200, "image/png", std::string(png.begin(), png.end())};
    });
}

void Service::mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.set_payload_max_length(kMaxUploadBytes);
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        std::string code(res.status == 404 ? to_string(ErrorCode::NotFound) : to_string(ErrorCode::InvalidArgument));
        std::string msg = httplib::status_message(res.status);
        if (res.status == 413) {
            code = "PayloadTooLarge";
            msg = "payload exceeds 16 MiB";
        }
        const Json j{{"error_code", code}, {"message", msg}};
        res.set_content(j.dump(), "application/json");
        return httplib::Server::HandlerResponse::Handled;
    });

    server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    server.Post("/v1/images", [this, send](const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data() || !req.has_file("image")) {
            send(res, error_reply(400, ErrorCode::MissingField, "expected multipart form with an 'image' part"));
            return;
        }
        std::optional<std::string> mask, meta;
        if (req.has_file("mask")) mask = req.get_file_value("mask").content;
        if (req.has_file("metadata")) meta = req.get_file_value("metadata").content;
        send(res, upload(req.get_file_value("image").content, mask, meta));
    });
    server.Post("/v1/compare",
                [this, send](const httplib::Request& req, httplib::Response& res) { send(res, compare(req.body)); });
    server.Post("/v1/identify",
                [this, send](const httplib::Request& req, httplib::Response& res) { send(res, identify(req.body)); });
    server.Get(R"(/v1/quality/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, quality(req.matches[1]));
    });
    server.Get(R"(/v1/heatmap/([^/]+)/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, heatmap(req.matches[1], req.matches[2]));
    });
}

void run_server(Service& service, const std::string& host, int port) {
    httplib::Server server;
    service.mount(server);
    if (!server.listen(host, port)) {
        throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
    }
}

}  // namespace pmiris
