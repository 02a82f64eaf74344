#include "pmiris/image.hpp"
#include "pmiris/metadata.hpp"
#include "pmiris/template_io.hpp"
#include "pmiris/types.hpp"

#include "../support/check.hpp"
#include "../support/oracles.hpp"

#include <sstream>

using namespace pmiris;

namespace {

std::span<const std::uint8_t> bytes_of(const std::vector<std::uint8_t>& v) { return v; }

SampleMetadata sample(std::string id, std::string subject, Eye eye, double pmi, int age, Gender g) {
    return SampleMetadata{std::move(id), std::move(subject), eye, 1, pmi, age, g, "img/" + subject + ".png"};
}

}  // namespace

TEST_CASE("constant P5 image loads with every pixel intact") {
    const std::vector<std::uint8_t> px(640 * 480, 128);
    const auto img = decode_image(bytes_of(encode_pgm(640, 480, px)), SourceChannel::nir, "c");
    CHECK(img.width() == 640);
    CHECK(img.height() == 480);
    CHECK(std::all_of(img.pixels().begin(), img.pixels().end(), [](auto v) { return v == 128; }));
    CHECK_FALSE(img.non_canonical_size());
}

TEST_CASE("red channel is extracted from RGB PNG") {
    std::vector<std::uint8_t> rgb;
    for (int i = 0; i < 80 * 70; ++i) rgb.insert(rgb.end(), {10, 200, 200});
    const auto png = encode_png_rgb(80, 70, rgb);
    const auto img = decode_image(bytes_of(png), SourceChannel::rgb_red, "rgb");
    CHECK(std::all_of(img.pixels().begin(), img.pixels().end(), [](auto v) { return v == 10; }));
    CHECK(img.non_canonical_size());
    CHECK_ERROR_CODE(decode_image(bytes_of(png), SourceChannel::nir, "rgb"), ErrorCode::UnsupportedFormat);
}

TEST_CASE("image size limits and format errors") {
    const std::vector<std::uint8_t> tiny(8 * 8, 1);
    CHECK_ERROR_CODE(decode_image(bytes_of(encode_pgm(8, 8, tiny)), SourceChannel::nir, "t"), ErrorCode::DimensionTooSmall);
    CHECK_ERROR_CODE(decode_image(bytes_of(encode_png_gray(8, 8, tiny)), SourceChannel::nir, "t"),
                     ErrorCode::DimensionTooSmall);
    const std::vector<std::uint8_t> junk{'G', 'I', 'F', '8', '9', 'a'};
    CHECK_ERROR_CODE(decode_image(bytes_of(junk), SourceChannel::nir, "j"), ErrorCode::UnsupportedFormat);
    auto pgm = encode_pgm(64, 64, std::vector<std::uint8_t>(64 * 64, 3));
    pgm.resize(pgm.size() - 10);
    CHECK_ERROR_CODE(decode_image(bytes_of(pgm), SourceChannel::nir, "short"), ErrorCode::CorruptFile);
}

TEST_CASE("image decoding is deterministic and PNG matches PGM") {
    std::mt19937_64 rng(5);
    std::vector<std::uint8_t> px(96 * 64);
    for (auto& v : px) v = static_cast<std::uint8_t>(rng());
    const auto a = decode_image(bytes_of(encode_pgm(96, 64, px)), SourceChannel::nir, "a");
    const auto b = decode_image(bytes_of(encode_pgm(96, 64, px)), SourceChannel::nir, "a");
    const auto c = decode_image(bytes_of(encode_png_gray(96, 64, px)), SourceChannel::nir, "a");
    CHECK(std::equal(a.pixels().begin(), a.pixels().end(), b.pixels().begin(), b.pixels().end()));
    CHECK(std::equal(a.pixels().begin(), a.pixels().end(), c.pixels().begin(), c.pixels().end()));
}

TEST_CASE("metadata CSV parsing") {
    std::istringstream ok(std::string(kMetadataHeader) +
                          "\ns1,A,left,1,10,40,male,a.png\ns2,A,L,2,20.5,40,m,b.png\ns3,B,OD,1,0,71,F,c.png\n");
    const auto rows = parse_metadata_csv(ok);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].eye == Eye::left);
    CHECK(rows[1].pmi_hours == 20.5);
    CHECK(rows[2].eye == Eye::right);
    CHECK(rows[2].gender == Gender::female);

    std::istringstream missing(std::string(kMetadataHeader) + "\ns1,A,left,1,,40,male,a.png\n");
    try {
        parse_metadata_csv(missing);
        FAIL("expected MissingField");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingField);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }

    std::istringstream bad_header("id,subject\n");
    CHECK_ERROR_CODE(parse_metadata_csv(bad_header), ErrorCode::SchemaMismatch);
}

TEST_CASE("metadata CSV round-trips") {
    std::vector<SampleMetadata> rows{sample("x,1", "S \"q\"", Eye::right, 0.1 + 0.2, 33, Gender::unknown),
                                     sample("y", "S2", Eye::left, 1e-7, 0, Gender::male)};
    std::ostringstream out;
    write_metadata_csv(out, rows);
    std::istringstream in(out.str());
    CHECK(parse_metadata_csv(in) == rows);
}

TEST_CASE("comparison records and score CSV") {
    const auto a = sample("a", "S1", Eye::left, 10, 30, Gender::male);
    const auto b = sample("b", "S1", Eye::left, 50, 30, Gender::male);
    const auto c = sample("c", "S1", Eye::right, 5, 70, Gender::female);
    auto r1 = make_record(a, b);
    CHECK(r1.label == PairLabel::genuine);
    CHECK(r1.pmi_max_hours == 50);
    CHECK(r1.gender == "male");
    CHECK(r1.age_group == "1");
    auto r2 = make_record(a, c);
    CHECK(r2.label == PairLabel::impostor);  // same subject, other eye
    CHECK(r2.gender == "mixed");
    CHECK(r2.age_group == "mixed");
    r1.score = 1.0 / 3.0;
    r1.best_shift = -7;
    r2.ftm = true;

    std::ostringstream out;
    write_score_csv(out, {r1, r2});
    std::istringstream in(out.str());
    const auto back = parse_score_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == r1);
    CHECK(back[1] == r2);
    CHECK_FALSE(back[1].score.has_value());
}

TEST_CASE("age groups use inclusive bounds") {
    CHECK(age_group_of(33) == 1);
    CHECK(age_group_of(34) == 2);
    CHECK(age_group_of(66) == 2);
    CHECK(age_group_of(67) == 3);
    CHECK(age_group_of(99) == 3);
    CHECK_FALSE(age_group_of(0).has_value());
    CHECK_FALSE(age_group_of(100).has_value());
}

TEST_CASE("template binary format") {
    std::mt19937_64 rng(11);
    const auto t = oracle::random_template(64, 512, 2, 0.7, rng, EncoderId::loggabor1d, 0x0123456789abcdefULL);
    const auto bytes = serialize_template(t);
    CHECK(bytes.size() == 4 + 1 + 1 + 2 + 2 + 1 + 8 + 3 * (64 * 512 / 8));
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PMIT");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 2);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 64);
    CHECK(bytes[8] == 2);
    CHECK(bytes[9] == 0);
    CHECK(bytes[10] == 2);
    CHECK(bytes[11] == 0x01);
    CHECK(bytes[18] == 0xef);
    // first plane byte packs row 0 columns 0..7 MSB-first
    std::uint8_t first = 0;
    for (int c = 0; c < 8; ++c) first = static_cast<std::uint8_t>(first | (t.bitplanes[0].at(0, c) << (7 - c)));
    CHECK(bytes[19] == first);
    CHECK(deserialize_template(bytes) == t);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_ERROR_CODE(deserialize_template(truncated), ErrorCode::LengthMismatch);
    auto magic = bytes;
    std::copy_n("XXXX", 4, magic.begin());
    CHECK_ERROR_CODE(deserialize_template(magic), ErrorCode::BadMagic);
    auto version = bytes;
    version[4] = 9;
    CHECK_ERROR_CODE(deserialize_template(version), ErrorCode::VersionUnsupported);
}

TEST_CASE("odd-sized templates pad each plane to a byte") {
    std::mt19937_64 rng(3);
    const auto t = oracle::random_template(3, 5, 3, 0.5, rng);
    const auto bytes = serialize_template(t);
    CHECK(bytes.size() == 19 + 4 * 2);
    CHECK(deserialize_template(bytes) == t);
}

TEST_CASE("segmentation invariants") {
    Segmentation s{{100, 100, 30}, {100, 100, 90}, std::nullopt};
    CHECK_NOTHROW(s.validate());
    s.pupil.r = 90;
    CHECK_ERROR_CODE(s.validate(), ErrorCode::DegenerateGeometry);
    s.pupil = {300, 300, 10};
    CHECK_ERROR_CODE(s.validate(), ErrorCode::DegenerateGeometry);
}
