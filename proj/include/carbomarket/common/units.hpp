#pragma once

namespace carbomarket {

// Power is carried in MW and energy in MWh throughout. Prices quoted per kWh
// (emission prices, storage combined price, unit emission rates) are converted
// with this factor at the module boundaries.
inline constexpr double kKwhPerMwh = 1000.0;

}  // namespace carbomarket
