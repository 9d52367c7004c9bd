//! dB / dBm conversions. Internal power unit is mW.

use num_traits::Float;

pub fn db_to_linear<T: Float>(db: T) -> T {
    T::from(10.0).unwrap().powf(db / T::from(10.0).unwrap())
}

pub fn linear_to_db<T: Float>(linear: T) -> T {
    T::from(10.0).unwrap() * linear.log10()
}

pub fn dbm_to_mw<T: Float>(dbm: T) -> T {
    db_to_linear(dbm)
}

pub fn mw_to_dbm<T: Float>(mw: T) -> T {
    linear_to_db(mw)
}
