//! Robot models, demonstrations, and environments shipped with the crate.

pub const NEXTAGE_LIKE_ROBOT: &str = include_str!("../fixtures/nextage_like.robot");
pub const FETCH_LIKE_ROBOT: &str = include_str!("../fixtures/fetch_like.robot");
pub const PLACE_ON_PLATE_DEMO: &str = include_str!("../fixtures/place_on_plate.demo");
pub const SHELF_DEMO: &str = include_str!("../fixtures/shelf.demo");
pub const TABLE_PLATE_ENV: &str = include_str!("../fixtures/table_plate.env");
pub const SHELF_ENV: &str = include_str!("../fixtures/shelf.env");

/// `(file name, contents)` of every bundled robot.
pub const ROBOTS: [(&str, &str); 2] = [
    ("nextage_like.robot", NEXTAGE_LIKE_ROBOT),
    ("fetch_like.robot", FETCH_LIKE_ROBOT),
];

/// Path of a bundled fixture inside the source tree.
pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
