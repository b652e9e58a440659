#include "phid/io/hashing.hpp"

#include "phid/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace phid::io {

std::string git_blob_hash(std::string_view bytes)
{
	const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
	std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
	unsigned int len = 0;
	EVP_MD_CTX* ctx = EVP_MD_CTX_new();
	const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
	                EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
	                EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
	                EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
	EVP_MD_CTX_free(ctx);
	if (!ok)
		throw std::runtime_error("SHA-1 digest failed");
	std::string hex;
	char buf[3];
	for (unsigned int i = 0; i < len; ++i) {
		std::snprintf(buf, sizeof buf, "%02x", digest[i]);
		hex += buf;
	}
	return hex;
}

std::string read_file(const std::filesystem::path& path)
{
	std::ifstream is(path, std::ios::binary);
	if (!is)
		throw ConfigError("cannot open " + path.string());
	std::ostringstream ss;
	ss << is.rdbuf();
	return ss.str();
}

std::string git_blob_hash_file(const std::filesystem::path& path)
{
	return git_blob_hash(read_file(path));
}

void write_file(const std::filesystem::path& path, std::string_view bytes)
{
	std::ofstream os(path, std::ios::binary);
	os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
	if (!os)
		throw std::runtime_error("cannot write " + path.string());
}

} // namespace phid::io
