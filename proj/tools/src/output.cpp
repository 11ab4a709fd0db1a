#include "output.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include <fqc/types.hpp>

namespace fqc::app {

std::string sha256_hex(const std::string& bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i)
        os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

OutputDir::OutputDir(std::filesystem::path dir) : dir_(std::move(dir))
{
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw InvalidArgument("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

void OutputDir::write(const std::string& name, const std::string& content, const std::string& kind)
{
    std::lock_guard lock(mu_);
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out)
        throw std::runtime_error("failed writing " + (dir_ / name).string());
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
    Entry e{name, kind, sha256_hex(content), content.size()};
    if (it == entries_.end())
        entries_.push_back(e);
    else
        *it = e;
}

void OutputDir::write_json(const std::string& name, const nlohmann::json& j, const std::string& kind)
{
    write(name, j.dump(2) + "\n", kind);
}

void OutputDir::finish(const std::string& command)
{
    nlohmann::json m;
    m["schema_version"] = 1;
    m["command"] = command;
    auto arts = nlohmann::json::array();
    {
        std::lock_guard lock(mu_);
        std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
        for (const auto& e : entries_)
            arts.push_back({{"path", e.name}, {"kind", e.kind}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    }
    m["artifacts"] = arts;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    out << m.dump(2) << "\n";
    if (!out)
        throw std::runtime_error("failed writing manifest.json");
}

}  // namespace fqc::app
