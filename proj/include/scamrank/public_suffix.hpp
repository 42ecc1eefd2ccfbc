#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

#include "scamrank/common.hpp"

namespace scamrank {

class UrlError : public Error {
 public:
  using Error::Error;
};

struct UrlParts {
  std::string scheme;
  std::string host;  // lowercase, no port/userinfo, trailing dot removed
  std::string path;  // everything after the authority, may be empty
};

// Splits an absolute URL ("scheme://authority/..."). Throws UrlError otherwise.
UrlParts parse_url(std::string_view url);
bool is_ip_literal(std::string_view host);

// Registrable-domain (eTLD+1) lookup over a Public Suffix List in its
// standard text format. Normal, wildcard and exception rules are supported;
// both the ICANN and private sections are loaded.
class PublicSuffixList {
 public:
  static PublicSuffixList from_string(std::string_view text);
  static PublicSuffixList from_file(const std::filesystem::path& path);
  // The pinned snapshot in the data directory. Loaded once.
  static const PublicSuffixList& bundled();

  // Public suffix of a hostname under the "*" default rule.
  std::string public_suffix(std::string_view host) const;
  // eTLD+1 of a hostname; a host that is itself a suffix is returned as-is.
  std::string registrable_domain(std::string_view host) const;
  // eTLD+1 of an absolute URL; IP-literal hosts come back verbatim.
  std::string root_domain(std::string_view url) const;

  std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // stored without the "*." prefix
  std::unordered_set<std::string> exceptions_;  // stored without the "!"
};

}  // namespace scamrank
