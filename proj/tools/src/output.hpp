#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fqc::app {

std::string sha256_hex(const std::string& bytes);

// One directory per invocation. Every artifact goes through write() so the manifest sees all of them.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path dir);

    const std::filesystem::path& path() const { return dir_; }

    void write(const std::string& name, const std::string& content, const std::string& kind);
    void write_json(const std::string& name, const nlohmann::json& j, const std::string& kind);

    // manifest.json, artifacts sorted by name
    void finish(const std::string& command);

private:
    struct Entry {
        std::string name, kind, sha256;
        std::size_t bytes;
    };
    std::filesystem::path dir_;
    std::mutex mu_;
    std::vector<Entry> entries_;
};

}  // namespace fqc::app
