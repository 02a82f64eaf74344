// Writes the small synthetic evaluation fixture: two eyes, three captures each.
#include "pmiris/image.hpp"
#include "pmiris/metadata.hpp"
#include "pmiris/synthetic.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

namespace fs = std::filesystem;
using namespace pmiris;

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic fixture"};
    std::string out_dir;
    app.add_option("out", out_dir)->required();
    CLI11_PARSE(app, argc, argv);

    struct Eye {
        std::string subject;
        pmiris::Eye side;
        std::uint64_t seed;
        int age;
        Gender gender;
    };
    const Eye eyes[] = {{"S01", pmiris::Eye::left, 101, 45, Gender::male},
                        {"S02", pmiris::Eye::right, 202, 71, Gender::female}};
    const double rotations_deg[] = {0.0, 3.0, -4.0};
    const double pmi[] = {6.0, 30.0, 120.0};

    fs::create_directories(fs::path(out_dir) / "images");
    fs::create_directories(fs::path(out_dir) / "masks");
    std::vector<SampleMetadata> meta;
    for (const auto& e : eyes) {
        const auto pattern = synth::IrisPattern::random(e.seed);
        for (int k = 0; k < 3; ++k) {
            synth::CaptureParams p;
            p.cx = 320 + 6 * k;
            p.cy = 240 - 4 * k;
            p.rotation = rotations_deg[k] * std::numbers::pi / 180.0;
            p.noise_sigma = 4;
            p.noise_seed = e.seed * 10 + static_cast<std::uint64_t>(k);
            p.occlusion_fraction = k == 2 ? 0.1 : 0.0;
            const std::string id = e.subject + "_" + to_string(e.side) + "_" + std::to_string(k + 1);
            const auto eye = synth::render_eye(pattern, p, id);
            const std::string file = id + ".png";
            write_file_bytes(fs::path(out_dir) / "images" / file,
                             encode_png_gray(eye.image.width(), eye.image.height(), eye.image.pixels()));
            write_file_bytes(fs::path(out_dir) / "masks" / file,
                             encode_png_gray(eye.mask.width(), eye.mask.height(), eye.mask.pixels()));
            meta.push_back(SampleMetadata{id, e.subject, e.side, k + 1, pmi[k], e.age, e.gender, "images/" + file});
        }
    }
    std::ofstream csv(fs::path(out_dir) / "metadata.csv");
    write_metadata_csv(csv, meta);
    std::cout << meta.size() << " samples written to " << out_dir << '\n';
}
