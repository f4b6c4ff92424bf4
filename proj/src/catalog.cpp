// Built-in coefficient sets.
//
// The 3S*+ pairs are stored exactly as their published double-precision
// tables: gamma columns, delta, the main Butcher weights b and the embedded
// weights. Register coefficients beta, abscissae c and the FSAL weight are
// recovered in three_s_star_plus_from_tables().

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "lsrk/coefficients.hpp"

namespace lsrk {
namespace {

struct PrintedTable {
  const char* name;
  bool fsal;
  int q;
  int qhat;
  std::vector<double> gamma1, gamma2, gamma3, delta, b, bhat;
};

// RK3(2)5[3S*+]
const PrintedTable kRk35{
    "RK3(2)5[3S*+]", false, 3, 2,
    // gamma1
    {+0.0000000000000000e+00,
     +2.5876690703520788e-01,
     -1.3243668739945030e-01,
     +5.0556012314603993e-02,
     +5.6705528079028777e-01},
    // gamma2
    {+1.0000000000000000e+00,
     +5.5284187451021605e-01,
     +6.7318444003896738e-01,
     +2.8031038045076351e-01,
     +5.5215088735073936e-01},
    // gamma3
    {+0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +2.7525858134466369e-01,
     -8.9505487092797853e-01},
    // delta
    {+1.0000000000000000e+00,
     +3.4076872093214550e-01,
     +3.4143992805846252e-01,
     +7.2293027328755899e-01,
     +0.0000000000000000e+00},
    // b
    {+1.1479315633699007e-01,
     +8.9335592952328596e-02,
     +4.3558587173792318e-01,
     +2.4735852952572862e-01,
     +1.1292684944702953e-01},
    // bhat
    {+1.0463633713540937e-01,
     +9.5204315749567586e-02,
     +4.4824466455686685e-01,
     +2.4490302954613102e-01,
     +1.0701165301202518e-01},
};

// RK3(2)5F[3S*+]
const PrintedTable kRk35F{
    "RK3(2)5F[3S*+]", true, 3, 2,
    // gamma1
    {+0.0000000000000000e+00,
     +2.5877719797257331e-01,
     -1.3243803601407234e-01,
     +5.0560339481908259e-02,
     +5.6705320007393134e-01},
    // gamma2
    {+1.0000000000000000e+00,
     +5.5283549093013895e-01,
     +6.7318716082030616e-01,
     +2.8031039632976723e-01,
     +5.5215254470206099e-01},
    // gamma3
    {+0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +2.7525632733046762e-01,
     -8.9505261746740339e-01},
    // delta
    {+1.0000000000000000e+00,
     +3.4076558793345252e-01,
     +3.4143826550033862e-01,
     +7.2292753667879872e-01,
     +0.0000000000000000e+00},
    // b
    {+1.1479359710235412e-01,
     +8.9334428531133159e-02,
     +4.3558710250086169e-01,
     +2.4735761882014512e-01,
     +1.1292725304550591e-01},
    // bhat
    {+9.4841667050357029e-02,
     +1.7263713394303537e-01,
     +3.9982431890843712e-01,
     +1.7180168075801786e-01,
     +5.8819144221557401e-02},
};

// RK4(3)9[3S*+]
const PrintedTable kRk49{
    "RK4(3)9[3S*+]", false, 4, 3,
    // gamma1
    {+0.0000000000000000e+00,
     -4.6556413012591804e+00,
     -7.7202649248360644e-01,
     -4.0244232134197242e+00,
     -2.1296852467390187e-02,
     -2.4350225192344701e+00,
     +1.9856274809861678e-02,
     -2.8107901128852841e-01,
     +1.6894348958355357e-01},
    // gamma2
    {+1.0000000000000000e+00,
     +2.4992627526078262e+00,
     +5.8668203654361373e-01,
     +1.2051413654126708e+00,
     +3.4747937967008691e-01,
     +1.3213461401287232e+00,
     +3.1196363243793707e-01,
     +4.3514190558940874e-01,
     +2.3596982994407883e-01},
    // gamma3
    {+0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +7.6210371111381703e-01,
     -1.9811821590872183e-01,
     -6.2289607063175667e-01,
     -3.7522469934326264e-01,
     -3.3554365390009466e-01,
     -4.5609631107174843e-02},
    // delta
    {+1.0000000000000000e+00,
     +1.2629238543878065e+00,
     +7.5749671775608729e-01,
     +5.1635911581112226e-01,
     -2.7463337920428273e-02,
     -4.3826746539417710e-01,
     +1.2735871036683928e+00,
     -6.2947400454427949e-01,
     +0.0000000000000000e+00},
    // b
    {+4.5037319691658841e-02,
     +1.8592173220119687e-01,
     +3.3297275092076306e-02,
     -4.7842226210501985e-03,
     +4.0558480626375678e-03,
     +4.1850279996827944e-01,
     -4.3818945074742778e-03,
     +2.7128460973244426e-02,
     +2.9522268113943101e-01},
    // bhat
    {+4.5506559279709452e-02,
     +1.1759683104926386e-01,
     +3.6582573305152133e-02,
     -5.3115558343556296e-03,
     +5.1782500127131271e-03,
     +4.9546390221186826e-01,
     -5.9993031327378659e-03,
     +9.4050934345683165e-02,
     +2.1693180876270352e-01},
};

// RK4(3)9F[3S*+]
const PrintedTable kRk49F{
    "RK4(3)9F[3S*+]", true, 4, 3,
    // gamma1
    {+0.0000000000000000e+00,
     -4.6556414473350687e+00,
     -7.7202650996458722e-01,
     -4.0244366905198063e+00,
     -2.1296762840185311e-02,
     -2.4350225097901097e+00,
     +1.9856272971319869e-02,
     -2.8107911467910385e-01,
     +1.6894341687548597e-01},
    // gamma2
    {+1.0000000000000000e+00,
     +2.4992627925744948e+00,
     +5.8668203777188754e-01,
     +1.2051460865230945e+00,
     +3.4747937221867325e-01,
     +1.3213460609651131e+00,
     +3.1196364646941938e-01,
     +4.3514195396843791e-01,
     +2.3596981300287537e-01},
    // gamma3
    {+0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +7.6210066787213149e-01,
     -1.9811825043394005e-01,
     -6.2289592186990073e-01,
     -3.7522483807759566e-01,
     -3.3554383091351697e-01,
     -4.5609550050311212e-02},
    // delta
    {+1.0000000000000000e+00,
     +1.2629238766481143e+00,
     +7.5749671896859117e-01,
     +5.1635894531407278e-01,
     -2.7463274218026097e-02,
     -4.3826731781279443e-01,
     +1.2735872946026565e+00,
     -6.2947402839274003e-01,
     +0.0000000000000000e+00},
    // b
    {+4.5037326272637540e-02,
     +1.8592173036998480e-01,
     +3.3297296725697173e-02,
     -4.7842041809589755e-03,
     +4.0558359610313108e-03,
     +4.1850277725960744e-01,
     -4.3819019689193264e-03,
     +2.7128437964460898e-02,
     +2.9522270159645919e-01},
    // bhat
    {+2.4836759124515911e-02,
     +1.8663277745621037e-01,
     +5.6710807959369842e-02,
     -3.4476954391492879e-03,
     +3.6022450565166364e-03,
     +4.5455706221450887e-01,
     -2.4346652894276124e-04,
     +6.6427553611035500e-02,
     +1.6136970795235051e-01},
};

// RK5(4)10[3S*+]
const PrintedTable kRk510{
    "RK5(4)10[3S*+]", false, 5, 4,
    // gamma1
    {+0.0000000000000000e+00,
     +4.0436600785046961e-01,
     -8.5034274642631846e-01,
     -6.9508941670724198e+00,
     +9.2387652253282782e-01,
     -2.5631780399574042e+00,
     +2.5457448699663476e-01,
     +3.1258317338631691e-01,
     -7.0071148005675854e-01,
     +4.8396209709807264e-01},
    // gamma2
    {+1.0000000000000000e+00,
     +6.8714670697523461e-01,
     +1.0930247604688987e+00,
     +3.2259753823301613e+00,
     +1.0411537008413965e+00,
     +1.2928214888647027e+00,
     +7.3914627692970059e-01,
     +1.2391292570393000e-01,
     +1.8427534793667669e-01,
     +5.7127889426970779e-02},
    // gamma3
    {+0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +0.0000000000000000e+00,
     -2.3934051593421395e+00,
     -1.9028544220959867e+00,
     -2.8200422105832073e+00,
     -1.8326984641305650e+00,
     -2.1990945107506979e-01,
     -4.0824306603848765e-01,
     -1.3776697911212080e-01},
    // delta
    {+1.0000000000000000e+00,
     -1.3317784091338497e-01,
     +8.2604227852460299e-01,
     +1.5137004305133324e+00,
     -1.3058100631770482e+00,
     +3.0366787893425076e+00,
     -1.4494582670745926e+00,
     +3.8343138733209576e+00,
     +4.1222939719233249e+00,
     +0.0000000000000000e+00},
    // b
    {-2.2801023055963646e-03,
     +1.4073930208232305e-02,
     +2.3326917941728226e-01,
     +4.8082667004651816e-02,
     +4.1190032211396227e-01,
     -1.2914610713647529e-01,
     +1.2207460110385798e-01,
     +4.3578588031133875e-02,
     +1.0250768752899050e-01,
     +1.5593923403396062e-01},
    // bhat
    {+5.7345884846761938e-02,
     +1.9714475180397338e-02,
     +7.2152966056837173e-02,
     +1.7396594898079398e-01,
     +3.7036936004454879e-01,
     -1.2155990390550650e-01,
     +1.1803729454911216e-01,
     +4.1556888233648698e-02,
     +1.2278866279103799e-01,
     +1.4562842322236844e-01},
};

// RK5(4)10F[3S*+]
const PrintedTable kRk510F{
    "RK5(4)10F[3S*+]", true, 5, 4,
    // gamma1
    {+0.0000000000000000e+00,
     +4.0436601216857498e-01,
     -8.5034272895758400e-01,
     -6.9508941752621176e+00,
     +9.2387651927310854e-01,
     -2.5631780565098912e+00,
     +2.5457448793652260e-01,
     +3.1258317074119985e-01,
     -7.0071144144405084e-01,
     +4.8396210160238334e-01},
    // gamma2
    {+1.0000000000000000e+00,
     +6.8714670281614165e-01,
     +1.0930247489147509e+00,
     +3.2259753796071928e+00,
     +1.0411537025101014e+00,
     +1.2928214879121649e+00,
     +7.3914627557881230e-01,
     +1.2391292513718004e-01,
     +1.8427534723701233e-01,
     +5.7127889987965835e-02},
    // gamma3
    {+0.0000000000000000e+00,
     +0.0000000000000000e+00,
     +0.0000000000000000e+00,
     -2.3934051332441948e+00,
     -1.9028544224217609e+00,
     -2.8200422073999771e+00,
     -1.8326984652773810e+00,
     -2.1990944830846712e-01,
     -4.0824306358478707e-01,
     -1.3776697978802896e-01},
    // delta
    {+1.0000000000000000e+00,
     -1.3317784195088034e-01,
     +8.2604228147502079e-01,
     +1.5137004257557283e+00,
     -1.3058100599350237e+00,
     +3.0366788029241634e+00,
     -1.4494582743988951e+00,
     +3.8343138991763621e+00,
     +4.1222937600129850e+00,
     +0.0000000000000000e+00},
    // b
    {-2.2801003218369809e-03,
     +1.4073931157901863e-02,
     +2.3326917755084567e-01,
     +4.8082667413538623e-02,
     +4.1190032177069519e-01,
     -1.2914610678077362e-01,
     +1.2207460138487101e-01,
     +4.3578585831744204e-02,
     +1.0250768775680807e-01,
     +1.5593923423620598e-01},
    // bhat
    {-2.0192554400120660e-02,
     +2.7379034809591845e-02,
     +3.0288186361459657e-01,
     -3.6568438806222223e-02,
     +3.9826647746767679e-01,
     -5.7159594211406851e-02,
     +9.8498551038485579e-02,
     +6.6546015524560853e-02,
     +9.0734795427481127e-02,
     +8.4322893253308037e-02},
};

LowStorageScheme from_printed(const PrintedTable& t) {
  return three_s_star_plus_from_tables(t.name, t.gamma1, t.gamma2, t.gamma3, t.delta, t.b, t.bhat,
                                       t.fsal, t.q, t.qhat);
}

// RK4(3)5[3S*], Ketcheson (2010). delta carries the two trailing weights of
// the embedded combination.
LowStorageScheme rk43_5_three_s_star() {
  LowStorageScheme m;
  m.name = "RK4(3)5[3S*]";
  m.cls = SchemeClass::ThreeSStar;
  m.s = 5;
  m.q = 4;
  m.qhat = 3;
  m.gamma1 = {0.0, -0.497531095840104, 1.010070514199942, -3.196559004608766, 1.717835630267259};
  m.gamma2 = {1.0, 1.384996869124138, 3.878155713328178, -2.324512951813145, -0.514633322274467};
  m.gamma3 = {0.0, 0.0, 0.0, 1.642598936063715, 0.188295940828347};
  m.beta = {0.075152045700771, 0.211361016946069, 1.100713347634329, 0.728537814675568,
            0.393172889823198};
  m.delta = {1.0,
             0.081252332929194,
             -1.083849060586449,
             -1.096110881845602,
             2.859440022030827,
             -0.655568367959557,
             -0.194421504490852};
  m.bhat.assign(m.s + 1, 0.0);
  m.c.assign(m.s, 0.0);
  m.c = low_storage_abscissae(m);
  return m;
}

ButcherPair make_pair(std::string name, std::vector<std::vector<double>> rows, std::vector<double> b,
                      std::vector<double> bhat, int q, int qhat) {
  ButcherPair p;
  p.name = std::move(name);
  p.s = b.size();
  p.A.assign(p.s * p.s, 0.0);
  p.c.assign(p.s, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      p.A[i * p.s + j] = rows[i][j];
      p.c[i] += rows[i][j];
    }
  }
  p.b = std::move(b);
  p.bhat = std::move(bhat);
  p.fsal = p.bhat.back() != 0.0;
  p.q = q;
  p.qhat = qhat;
  p.validate();
  return p;
}

// Shu-Osher SSP(3,3) with the embedded second-order weights of Conde, Fekete
// and Shadid (one-parameter family, parameter as published).
ButcherPair ssp33() {
  return make_pair("SSP3(2)3", {{}, {1.0}, {1.0 / 4, 1.0 / 4}}, {1.0 / 6, 1.0 / 6, 2.0 / 3},
                   {0.291485418878409, 0.291485418878409, 0.417029162243181, 0.0}, 3, 2);
}

ButcherPair bs3() {
  return make_pair("BS3(2)3F", {{}, {1.0 / 2}, {0.0, 3.0 / 4}}, {2.0 / 9, 1.0 / 3, 4.0 / 9},
                   {7.0 / 24, 1.0 / 4, 1.0 / 3, 1.0 / 8}, 3, 2);
}

ButcherPair bs5() {
  return make_pair(
      "BS5(4)7F",
      {{},
       {1.0 / 6},
       {2.0 / 27, 4.0 / 27},
       {183.0 / 1372, -162.0 / 343, 1053.0 / 1372},
       {68.0 / 297, -4.0 / 11, 42.0 / 143, 1960.0 / 3861},
       {597.0 / 22528, 81.0 / 352, 63099.0 / 585728, 58653.0 / 366080, 4617.0 / 20480},
       {174197.0 / 959244, -30942.0 / 79937, 8152137.0 / 19744439, 666106.0 / 1039181,
        -29421.0 / 29068, 482048.0 / 414219}},
      {587.0 / 8064, 0.0, 4440339.0 / 15491840, 24353.0 / 124800, 387.0 / 44800, 2152.0 / 5985,
       7267.0 / 94080},
      {2479.0 / 34992, 0.0, 123.0 / 416, 612941.0 / 3411720, 43.0 / 1440, 2272.0 / 6561,
       79937.0 / 1113912, 3293.0 / 556956},
      5, 4);
}

ButcherPair dp5() {
  return make_pair("DP5(4)6F",
                   {{},
                    {1.0 / 5},
                    {3.0 / 40, 9.0 / 40},
                    {44.0 / 45, -56.0 / 15, 32.0 / 9},
                    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
                    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656}},
                   {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
                   {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                    187.0 / 2100, 1.0 / 40},
                   5, 4);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

const std::vector<CatalogInfo>& catalog_list() {
  static const std::vector<CatalogInfo> list{
      {"RK3(2)5[3S*+]", "rk35-3s+", "optimized third-order 5-stage 3S*+ pair"},
      {"RK3(2)5F[3S*+]", "rk35-3s+fsal", "optimized third-order 5-stage 3S*+ FSAL pair"},
      {"RK4(3)9[3S*+]", "rk49-3s+", "optimized fourth-order 9-stage 3S*+ pair"},
      {"RK4(3)9F[3S*+]", "rk49-3s+fsal", "optimized fourth-order 9-stage 3S*+ FSAL pair"},
      {"RK5(4)10[3S*+]", "rk510-3s+", "optimized fifth-order 10-stage 3S*+ pair"},
      {"RK5(4)10F[3S*+]", "rk510-3s+fsal", "optimized fifth-order 10-stage 3S*+ FSAL pair"},
      {"SSP3(2)3", "ssp33", "three-stage SSP method with embedded second-order weights"},
      {"SSP3(2)4", "ssp43", "four-stage SSP method, memory-friendly low-storage step"},
      {"BS3(2)3F", "bs3", "Bogacki-Shampine 3(2) FSAL pair"},
      {"BS5(4)7F", "bs5", "Bogacki-Shampine 5(4) FSAL pair"},
      {"DP5(4)6F", "dp5", "Dormand-Prince 5(4) FSAL pair"},
      {"RK4(3)5[3S*]", "rk45-3s*", "Ketcheson fourth-order 5-stage 3S* pair"},
  };
  return list;
}

std::array<double, 3> default_gains(std::string_view name) {
  static const std::map<std::string, std::array<double, 3>> tuned{
      {"RK3(2)5[3S*+]", {0.64, -0.31, 0.04}},  {"RK3(2)5F[3S*+]", {0.70, -0.23, 0.00}},
      {"RK4(3)9[3S*+]", {0.25, -0.12, 0.00}},  {"RK4(3)9F[3S*+]", {0.38, -0.18, 0.01}},
      {"RK5(4)10[3S*+]", {0.47, -0.20, 0.06}}, {"RK5(4)10F[3S*+]", {0.45, -0.13, 0.00}},
      {"SSP3(2)3", {0.70, -0.37, 0.05}},       {"SSP3(2)4", {0.55, -0.27, 0.05}},
      {"BS3(2)3F", {0.60, -0.20, 0.00}},       {"BS5(4)7F", {0.28, -0.23, 0.00}},
      {"DP5(4)6F", {0.70, -0.40, 0.00}},
  };
  const std::string key = lower(name);
  for (const auto& info : catalog_list()) {
    if (key == lower(info.name) || key == lower(info.alias)) {
      if (auto it = tuned.find(info.name); it != tuned.end()) return it->second;
      break;
    }
  }
  return {0.6, -0.2, 0.0};
}

Method catalog_get(std::string_view name) {
  const std::string key = lower(name);
  std::string canonical;
  for (const auto& info : catalog_list()) {
    if (key == lower(info.name) || key == lower(info.alias)) {
      canonical = info.name;
      break;
    }
  }
  if (canonical == "RK3(2)5[3S*+]") return from_printed(kRk35);
  if (canonical == "RK3(2)5F[3S*+]") return from_printed(kRk35F);
  if (canonical == "RK4(3)9[3S*+]") return from_printed(kRk49);
  if (canonical == "RK4(3)9F[3S*+]") return from_printed(kRk49F);
  if (canonical == "RK5(4)10[3S*+]") return from_printed(kRk510);
  if (canonical == "RK5(4)10F[3S*+]") return from_printed(kRk510F);
  if (canonical == "SSP3(2)3") return ssp33();
  if (canonical == "SSP3(2)4") return Ssp43Scheme{};
  if (canonical == "BS3(2)3F") return bs3();
  if (canonical == "BS5(4)7F") return bs5();
  if (canonical == "DP5(4)6F") return dp5();
  if (canonical == "RK4(3)5[3S*]") return rk43_5_three_s_star();

  std::ostringstream msg;
  msg << "unknown method '" << name << "'; valid identifiers:";
  for (const auto& info : catalog_list()) msg << ' ' << info.name << " (" << info.alias << ')';
  throw UnknownMethodError(msg.str());
}

}  // namespace lsrk
