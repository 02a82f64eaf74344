#pragma once

#include "pmiris/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

// Fails unless expr throws pmiris::Error carrying the given code.
#define CHECK_ERROR_CODE(expr, expected_code)                                      \
    do {                                                                           \
        bool threw_ = false;                                                       \
        try {                                                                      \
            (void)(expr);                                                          \
        } catch (const pmiris::Error& e_) {                                        \
            threw_ = true;                                                         \
            CHECK_MESSAGE(e_.code() == (expected_code), std::string(e_.what())); \
        }                                                                          \
        CHECK_MESSAGE(threw_, "expected pmiris::Error from " #expr);               \
    } while (0)

namespace testutil {

// Fresh scratch directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("pmiris-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testutil
