#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "mrflp/image.hpp"
#include "mrflp/pipeline.hpp"

namespace httplib {
class Server;
}

namespace mrflp {

struct ServiceOptions {
    std::chrono::seconds idle_timeout{30 * 60};
    int max_dimension = 4096;
    SegmentationParams defaults;
};

/// In-memory interactive sessions. Each session owns its superpixel graph
/// and Cholesky factor; seed edits and solves reuse them. Calls on different
/// sessions run concurrently, calls on one session are serialized.
///
/// Errors: InvalidInputError (bad request), NotFoundError (unknown session or
/// missing result), SolverError and other runtime errors (solver failure).
class SegmentationService {
public:
    using Clock = std::chrono::steady_clock;

    explicit SegmentationService(ServiceOptions options = {},
                                 std::function<Clock::time_point()> clock = Clock::now);
    ~SegmentationService();

    /// `params` may hold superpixels, c, epsilon, threshold, border_background.
    /// Returns {"v":1,"session_id","width","height","superpixels","polygons"}.
    nlohmann::json create_session(const Bytes& png, const std::map<std::string, std::string>& params);

    /// JSON point lists or an RGBA scribble PNG, chosen by `content_type`.
    /// Replaces the current seeds and drops stored results.
    nlohmann::json put_seeds(const std::string& id, const std::string& body,
                             const std::string& content_type);

    /// {"method": name, "threshold": t (optional)}. Returns the result JSON
    /// with "v", "method" and "iterations" added.
    nlohmann::json solve(const std::string& id, const nlohmann::json& request);

    /// Per-pixel label map: round(255 L) for "continuous", 0/255 for "binary".
    Bytes labels_png(const std::string& id, const std::string& method, const std::string& view);

    nlohmann::json stats(const std::string& id);

    /// Drops sessions idle for longer than the timeout. Returns how many.
    int expire_idle();
    int session_count() const;

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id);

    ServiceOptions options_;
    std::function<Clock::time_point()> clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// HTTP front end for SegmentationService:
///   POST /sessions, PUT /sessions/{id}/seeds, POST /sessions/{id}/solve,
///   GET /sessions/{id}/labels, GET /sessions/{id}/stats.
class HttpService {
public:
    explicit HttpService(SegmentationService& service);
    ~HttpService();

    /// Port 0 picks an ephemeral port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    /// run() on a background thread.
    void start();
    /// Stops the server and joins the background thread, if any.
    void stop();
    /// Stops the server without joining; usable from a signal handler.
    void request_stop();

private:
    SegmentationService& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace mrflp
