#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dynmap/llm_client.hpp"

namespace dynmap {

namespace {

// Splits "scheme://host[:port]/path" into the client base and the path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("URL has no scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse HttpTransport::post(const HttpRequest& request) {
  const auto [base, path] = split_url(request.url);
  httplib::Client client(base);
  const auto seconds = static_cast<time_t>(request.timeout_seconds);
  const auto micros = static_cast<time_t>((request.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : request.headers) {
    if (k == "Content-Type") {
      content_type = v;
      continue;
    }
    headers.emplace(k, v);
  }
  auto result = client.Post(path, headers, request.body, content_type);
  if (!result) throw TransportError(httplib::to_string(result.error()));
  return {result->status, result->body};
}

}  // namespace dynmap
