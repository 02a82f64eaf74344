#pragma once

#include "pmiris/gallery.hpp"
#include "pmiris/json_io.hpp"
#include "pmiris/pipeline.hpp"
#include "pmiris/quality.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace pmiris {

inline constexpr std::size_t kMaxUploadBytes = 16u * 1024u * 1024u;
inline constexpr int kDefaultPort = 8750;

struct ServiceConfig {
    std::filesystem::path data_dir;     // images/ lives here
    std::filesystem::path gallery_dir;  // defaults to data_dir/gallery
    PipelineConfig pipeline;
    QualityConfig quality;
};

struct Reply {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// HTTP-independent request handlers for the /v1 API. Uploaded images are
/// stored under data_dir/images/<id>/ where id is a hash of the image and
/// mask bytes, so repeated uploads return the same id.
class Service {
public:
    explicit Service(ServiceConfig cfg);

    Reply health() const;
    Reply upload(const std::string& image_bytes, const std::optional<std::string>& mask_bytes,
                 const std::optional<std::string>& metadata_json);
    Reply compare(const std::string& request_body);
    Reply identify(const std::string& request_body);
    Reply quality(const std::string& image_id);
    Reply heatmap(const std::string& comparison_id, const std::string& encoder);

    /// Registers the /v1 routes, the payload limit and JSON error bodies.
    void mount(httplib::Server& server);

    const Pipeline& pipeline() const { return pipeline_; }

private:
    struct Stored {
        EyeCapture eye;
        std::optional<SampleMetadata> meta;
    };

    std::shared_ptr<const Stored> find_image(const std::string& id);
    std::shared_ptr<const EncodeOutcome> template_for(const std::string& id, EncoderId enc);
    std::optional<QualityRecord> quality_for(const std::string& id);
    std::shared_ptr<Gallery> gallery();

    ServiceConfig cfg_;
    Pipeline pipeline_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const Stored>> images_;
    std::map<std::pair<std::string, EncoderId>, std::shared_ptr<const EncodeOutcome>> templates_;
    std::map<std::string, std::pair<std::string, std::string>> comparisons_;
    std::mutex gallery_mu_;
    std::shared_ptr<Gallery> gallery_;
    std::filesystem::file_time_type gallery_stamp_{};
};

Reply error_reply(int status, ErrorCode code, const std::string& message);
int http_status_for(ErrorCode code);

/// Blocks serving on host:port until the process is stopped.
void run_server(Service& service, const std::string& host, int port);

}  // namespace pmiris
