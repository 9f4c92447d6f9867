#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

// Unique scratch directory, removed when the test block ends.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("rowpip-test-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Runs fn expecting it to throw Ex; returns the message ("" when nothing was
// thrown, so a later substring check fails loudly). Other exception types
// propagate and fail the test on their own.
template <typename Ex, typename Fn>
std::string message_of(Fn&& fn) {
    try {
        fn();
    } catch (const Ex& e) {
        return e.what();
    }
    return {};
}

inline bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace testutil
