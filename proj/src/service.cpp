#include "mrflp/service.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <httplib.h>

#include "mrflp/config.hpp"
#include "mrflp/errors.hpp"

namespace mrflp {

struct SegmentationService::Session {
    Session(std::string id_, SegmentationParams params_, PreparedImage prepared_,
            Clock::time_point now)
        : id(std::move(id_)), params(std::move(params_)), prepared(std::move(prepared_)),
          created(now), last_access(now)
    {
    }

    std::mutex mutex;
    std::string id;
    SegmentationParams params;
    PreparedImage prepared;
    PixelSeeds pixel_seeds;
    SeedSet seeds;
    struct Stored {
        Segmentation segmentation;
        double threshold = kDefaultThreshold;
    };
    std::map<Method, Stored> results;
    Clock::time_point created;
    Clock::time_point last_access;  // guarded by the service mutex
    int factorizations = 1;
    int solves = 0;
    int seed_updates = 0;
};

namespace {

std::string new_session_id()
{
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard<std::mutex> lock(m);
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(16) << rng();
    return out.str();
}

double parse_number(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    throw InvalidInputError("parameter '" + key + "' is not a number");
}

}  // namespace

SegmentationService::SegmentationService(ServiceOptions options,
                                         std::function<Clock::time_point()> clock)
    : options_(std::move(options)), clock_(std::move(clock))
{
}

SegmentationService::~SegmentationService() = default;

int SegmentationService::expire_idle()
{
    std::lock_guard<std::mutex> lock(mutex_);
    const auto now = clock_();
    int dropped = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_access > options_.idle_timeout) {
            it = sessions_.erase(it);
            ++dropped;
        } else {
            ++it;
        }
    }
    return dropped;
}

int SegmentationService::session_count() const
{
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(sessions_.size());
}

std::shared_ptr<SegmentationService::Session> SegmentationService::find(const std::string& id)
{
    expire_idle();
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    it->second->last_access = clock_();
    return it->second;
}

nlohmann::json SegmentationService::create_session(const Bytes& png,
                                                   const std::map<std::string, std::string>& params)
{
    expire_idle();
    SegmentationParams p = options_.defaults;
    for (const auto& [key, value] : params) {
        if (key == "superpixels") p.superpixels = static_cast<int>(parse_number(key, value));
        else if (key == "c") p.c = parse_number(key, value);
        else if (key == "epsilon") p.epsilon = parse_number(key, value);
        else if (key == "threshold") p.threshold = parse_number(key, value);
        else if (key == "lambda") p.lambda = parse_number(key, value);
        else if (key == "border_background") p.border_background = value == "1" || value == "true";
        else throw InvalidInputError("unknown parameter '" + key + "'");
    }
    validate_params(p);

    const auto image = decode_png_rgb(png);
    if (image.width > options_.max_dimension || image.height > options_.max_dimension)
        throw InvalidInputError("image exceeds " + std::to_string(options_.max_dimension) +
                                " pixels per side");
    auto prepared = prepare_image(image, p);

    nlohmann::json polygons = nlohmann::json::array();
    for (const auto& loops : prepared.map.boundary_polygons()) {
        auto rings = nlohmann::json::array();
        for (const auto& loop : loops) {
            auto pts = nlohmann::json::array();
            for (const auto& v : loop) pts.push_back({v[0], v[1]});
            rings.push_back(std::move(pts));
        }
        polygons.push_back(std::move(rings));
    }
    nlohmann::json out = {{"v", 1},
                          {"width", image.width},
                          {"height", image.height},
                          {"superpixels", prepared.map.count()},
                          {"polygons", std::move(polygons)}};

    auto session = std::make_shared<Session>(new_session_id(), p, std::move(prepared), clock_());
    out["session_id"] = session->id;
    std::lock_guard<std::mutex> lock(mutex_);
    sessions_[session->id] = std::move(session);
    return out;
}

nlohmann::json SegmentationService::put_seeds(const std::string& id, const std::string& body,
                                              const std::string& content_type)
{
    const bool is_png = content_type.rfind("image/png", 0) == 0;
    PixelSeeds seeds;
    int overlay_w = 0, overlay_h = 0;
    if (is_png) {
        const auto overlay = decode_png_rgba(Bytes(body.begin(), body.end()));
        overlay_w = overlay.width;
        overlay_h = overlay.height;
        seeds = pixel_seeds_from_overlay(overlay);
    } else {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInputError(std::string("seeds: malformed JSON: ") + e.what());
        }
        seeds = pixel_seeds_from_json(j);
    }
    auto s = find(id);
    std::lock_guard<std::mutex> lock(s->mutex);
    if (is_png && (overlay_w != s->prepared.map.width || overlay_h != s->prepared.map.height))
        throw InvalidInputError("seed overlay size differs from the image");
    auto set = rasterize_seeds(s->prepared.map, seeds, s->params.border_background);
    s->pixel_seeds = std::move(seeds);
    s->seeds = std::move(set);
    s->results.clear();
    ++s->seed_updates;
    return {{"v", 1},
            {"foreground", s->seeds.foreground().size()},
            {"background", s->seeds.background().size()},
            {"pixels",
             {{"foreground", s->pixel_seeds.foreground.size()},
              {"background", s->pixel_seeds.background.size()}}}};
}

nlohmann::json SegmentationService::solve(const std::string& id, const nlohmann::json& request)
{
    if (!request.is_object() || !request.contains("method") || !request["method"].is_string())
        throw InvalidInputError("solve: body must be {\"method\": name}");
    const Method method = parse_method(request["method"].get<std::string>());
    auto s = find(id);
    std::lock_guard<std::mutex> lock(s->mutex);
    double threshold = s->params.threshold;
    if (request.contains("threshold")) {
        if (!request["threshold"].is_number()) throw InvalidInputError("solve: threshold must be a number");
        threshold = request["threshold"].get<double>();
        if (!(threshold >= 0.0 && threshold <= 1.0))
            throw InvalidInputError("solve: threshold must lie in [0, 1]");
    }
    if (s->seeds.empty()) throw InvalidInputError("solve: no seeds set");
    Segmentation seg;
    try {
        seg = segment(s->prepared, s->seeds, method, s->params);
    } catch (const UnseededComponentError& e) {
        throw InvalidInputError(e.what());
    }
    ++s->solves;
    auto out = result_json(seg.labels, seg.energy, threshold);
    out["v"] = 1;
    out["method"] = to_string(method);
    out["iterations"] = seg.iterations;
    s->results[method] = {std::move(seg), threshold};
    return out;
}

Bytes SegmentationService::labels_png(const std::string& id, const std::string& method_name,
                                      const std::string& view)
{
    const Method method = parse_method(method_name);
    if (view != "continuous" && view != "binary")
        throw InvalidInputError("view must be 'continuous' or 'binary'");
    auto s = find(id);
    std::lock_guard<std::mutex> lock(s->mutex);
    const auto it = s->results.find(method);
    if (it == s->results.end())
        throw NotFoundError("no " + method_name + " result for the current seeds");
    const auto& labels = it->second.segmentation.labels.values;
    const auto& map = s->prepared.map;
    GrayImage img{map.width, map.height, std::vector<std::uint8_t>(map.labels.size())};
    for (std::size_t p = 0; p < map.labels.size(); ++p) {
        const double v = labels[map.labels[p]];
        img.data[p] = view == "binary"
                          ? (v >= it->second.threshold ? 255 : 0)
                          : static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    }
    return encode_png_gray(img);
}

nlohmann::json SegmentationService::stats(const std::string& id)
{
    auto s = find(id);
    std::lock_guard<std::mutex> lock(s->mutex);
    nlohmann::json solved = nlohmann::json::array();
    for (const auto& [m, _] : s->results) solved.push_back(to_string(m));
    return {{"v", 1},
            {"session_id", s->id},
            {"superpixels", s->prepared.map.count()},
            {"edges", s->prepared.graph.edge_count()},
            {"factor_nonzeros", s->prepared.factor.nonzeros()},
            {"factorizations", s->factorizations},
            {"solves", s->solves},
            {"seed_updates", s->seed_updates},
            {"solved", std::move(solved)}};
}

// ---- HTTP ----

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

nlohmann::json error_body(const std::string& kind, const std::string& what)
{
    return {{"v", 1}, {"error", what}, {"kind", kind}};
}

template <typename F>
void guarded(httplib::Response& res, F&& f)
{
    try {
        f();
    } catch (const NotFoundError& e) {
        send_json(res, 404, error_body("not_found", e.what()));
    } catch (const InvalidInputError& e) {
        send_json(res, 400, error_body("invalid_input", e.what()));
    } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, error_body("invalid_input", e.what()));
    } catch (const SolverError& e) {
        send_json(res, 500, error_body("solver_failure", e.what()));
    } catch (const std::exception& e) {
        send_json(res, 500, error_body("internal", e.what()));
    }
}

}  // namespace

HttpService::HttpService(SegmentationService& service)
    : service_(service), server_(std::make_unique<httplib::Server>())
{
    auto& srv = *server_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::map<std::string, std::string> params;
            for (const auto& [k, v] : req.params) params[k] = v;
            const Bytes png(req.body.begin(), req.body.end());
            send_json(res, 201, service_.create_session(png, params));
        });
    });
    srv.Put(R"(/sessions/([^/]+)/seeds)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            send_json(res, 200,
                      service_.put_seeds(req.matches[1], req.body, req.get_header_value("Content-Type")));
        });
    });
    srv.Post(R"(/sessions/([^/]+)/solve)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                throw InvalidInputError(std::string("malformed JSON: ") + e.what());
            }
            send_json(res, 200, service_.solve(req.matches[1], body));
        });
    });
    srv.Get(R"(/sessions/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!req.has_param("method")) throw InvalidInputError("labels: 'method' is required");
            const std::string view = req.has_param("view") ? req.get_param_value("view") : "continuous";
            const auto png = service_.labels_png(req.matches[1], req.get_param_value("method"), view);
            res.status = 200;
            res.set_content(std::string(png.begin(), png.end()), "image/png");
        });
    });
    srv.Get(R"(/sessions/([^/]+)/stats)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, service_.stats(req.matches[1])); });
    });
}

HttpService::~HttpService()
{
    stop();
}

int HttpService::bind(const std::string& host, int port)
{
    if (port == 0) {
        const int p = server_->bind_to_any_port(host);
        if (p < 0) throw std::runtime_error("cannot bind to " + host);
        return p;
    }
    if (!server_->bind_to_port(host, port))
        throw std::runtime_error("cannot bind to " + host + ":" + std::to_string(port));
    return port;
}

void HttpService::run()
{
    server_->listen_after_bind();
}

void HttpService::start()
{
    thread_ = std::thread([this] { run(); });
    server_->wait_until_ready();
}

void HttpService::request_stop()
{
    server_->stop();
}

void HttpService::stop()
{
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace mrflp
