#include "scamrank/public_suffix.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace scamrank {

UrlParts parse_url(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) throw UrlError("not an absolute URL: " + std::string(url));
  UrlParts out;
  out.scheme = to_lower(url.substr(0, sep));
  if (!std::isalpha(static_cast<unsigned char>(out.scheme[0])))
    throw UrlError("bad scheme in URL: " + std::string(url));
  for (char c : out.scheme)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      throw UrlError("bad scheme in URL: " + std::string(url));
  auto rest = url.substr(sep + 3);
  auto end = rest.find_first_of("/?#");
  auto authority = rest.substr(0, end);
  out.path = end == std::string_view::npos ? "" : std::string(rest.substr(end));
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  std::string_view host;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) throw UrlError("unterminated IPv6 literal: " + std::string(url));
    host = authority.substr(0, close + 1);
  } else {
    host = authority.substr(0, authority.find(':'));
  }
  out.host = to_lower(host);
  while (!out.host.empty() && out.host.back() == '.') out.host.pop_back();
  if (out.host.empty()) throw UrlError("URL has no host: " + std::string(url));
  return out;
}

bool is_ip_literal(std::string_view host) {
  if (!host.empty() && host.front() == '[') return true;
  int parts = 0;
  std::size_t i = 0;
  while (i <= host.size()) {
    std::size_t j = i;
    while (j < host.size() && std::isdigit(static_cast<unsigned char>(host[j]))) ++j;
    if (j == i || j - i > 3) return false;
    if (std::stoi(std::string(host.substr(i, j - i))) > 255) return false;
    ++parts;
    if (j == host.size()) break;
    if (host[j] != '.') return false;
    i = j + 1;
  }
  return parts == 4;
}

PublicSuffixList PublicSuffixList::from_string(std::string_view text) {
  PublicSuffixList psl;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    // Rules end at the first whitespace.
    auto t = trim(line);
    if (t.empty() || t.starts_with("//")) continue;
    auto rule = to_lower(t.substr(0, t.find_first_of(" \t")));
    if (rule.starts_with("!"))
      psl.exceptions_.insert(rule.substr(1));
    else if (rule.starts_with("*."))
      psl.wildcards_.insert(rule.substr(2));
    else
      psl.rules_.insert(rule);
  }
  return psl;
}

PublicSuffixList PublicSuffixList::from_file(const std::filesystem::path& path) {
  return from_string(read_file(path));
}

const PublicSuffixList& PublicSuffixList::bundled() {
  static const PublicSuffixList psl = from_file(data_dir() / "public_suffix_list.dat");
  return psl;
}

std::string PublicSuffixList::public_suffix(std::string_view host_in) const {
  std::string host = to_lower(host_in);
  auto labels = split(host, '.');
  const std::size_t n = labels.size();
  auto join_from = [&](std::size_t i) {
    std::string s = labels[i];
    for (std::size_t k = i + 1; k < n; ++k) s += "." + labels[k];
    return s;
  };
  // Scan suffixes from the longest; the first (longest) match wins, and an
  // exception rule yields its parent as the suffix.
  for (std::size_t i = 0; i < n; ++i) {
    auto cand = join_from(i);
    if (exceptions_.contains(cand)) return i + 1 < n ? join_from(i + 1) : cand;
    if (rules_.contains(cand)) return cand;
    if (i + 1 < n && wildcards_.contains(join_from(i + 1))) return cand;
  }
  return labels.back();
}

std::string PublicSuffixList::registrable_domain(std::string_view host_in) const {
  std::string host = to_lower(host_in);
  if (is_ip_literal(host)) return host;
  auto suffix = public_suffix(host);
  if (suffix.size() >= host.size()) return host;
  auto head = host.substr(0, host.size() - suffix.size() - 1);
  auto dot = head.rfind('.');
  return (dot == std::string::npos ? head : head.substr(dot + 1)) + "." + suffix;
}

std::string PublicSuffixList::root_domain(std::string_view url) const {
  auto parts = parse_url(url);
  if (is_ip_literal(parts.host)) return parts.host;
  return registrable_domain(parts.host);
}

}  // namespace scamrank
