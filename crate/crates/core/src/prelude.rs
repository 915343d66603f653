// Float methods come from num-traits so the crate builds without std.
#[allow(unused_imports)]
pub(crate) use num_traits::Float;

#[allow(unused_imports)]
pub(crate) use alloc::{
    borrow::ToOwned,
    boxed::Box,
    format,
    string::{String, ToString},
    vec,
    vec::Vec,
};
