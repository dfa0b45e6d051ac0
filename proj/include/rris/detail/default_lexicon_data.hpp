#pragma once
// Generated word lists; keep in sync with data/default_lexicon.txt and data/coco_catalog.json.

#include <array>
#include <string_view>

namespace rris::detail {

struct CatalogSeed {
    int id;
    std::string_view name;
    std::string_view synonyms;  // '|'-separated
};

inline const CatalogSeed kCocoCatalog[] = {
    {1, "person", "man|men|woman|women|boy|boys|girl|girls|guy|guys|lady|ladies|kid|kids|child|children|people|player|baby|skier|surfer|batter|catcher|umpire|gentleman|dude|mom|dad|toddler|pitcher|skateboarder|snowboarder|chef|cop|officer"},
    {2, "bicycle", "bike|bikes|cycle"},
    {3, "car", "taxi|cab|van|suv|sedan|jeep"},
    {4, "motorcycle", "motorbike|scooter|moped"},
    {5, "airplane", "plane|jet|aircraft|airliner"},
    {6, "bus", "buses"},
    {7, "train", "locomotive|tram"},
    {8, "truck", "lorry|pickup"},
    {9, "boat", "ship|canoe|kayak|sailboat"},
    {10, "traffic light", "stoplight"},
    {11, "fire hydrant", "hydrant"},
    {13, "stop sign", ""},
    {14, "parking meter", "meter"},
    {15, "bench", ""},
    {16, "bird", "duck|pigeon|seagull|gull|goose|parrot"},
    {17, "cat", "kitten|kitty"},
    {18, "dog", "puppy|pup"},
    {19, "horse", "pony"},
    {20, "sheep", "lamb"},
    {21, "cow", "cows|cattle|bull|calf"},
    {22, "elephant", ""},
    {23, "bear", ""},
    {24, "zebra", ""},
    {25, "giraffe", ""},
    {27, "backpack", ""},
    {28, "umbrella", "parasol"},
    {31, "handbag", "purse"},
    {32, "tie", "necktie"},
    {33, "suitcase", "luggage"},
    {34, "frisbee", ""},
    {35, "skis", "ski"},
    {36, "snowboard", ""},
    {37, "sports ball", "ball"},
    {38, "kite", ""},
    {39, "baseball bat", "bat"},
    {40, "baseball glove", "glove|mitt"},
    {41, "skateboard", ""},
    {42, "surfboard", ""},
    {43, "tennis racket", "racket|racquet"},
    {44, "bottle", ""},
    {46, "wine glass", "glass"},
    {47, "cup", "mug"},
    {48, "fork", ""},
    {49, "knife", "knives"},
    {50, "spoon", ""},
    {51, "bowl", ""},
    {52, "banana", ""},
    {53, "apple", ""},
    {54, "sandwich", "sub|burger"},
    {55, "orange", ""},
    {56, "broccoli", ""},
    {57, "carrot", ""},
    {58, "hot dog", "hotdog"},
    {59, "pizza", ""},
    {60, "donut", "doughnut"},
    {61, "cake", "cupcake"},
    {62, "chair", "seat|stool"},
    {63, "couch", "sofa"},
    {64, "potted plant", "plant|houseplant"},
    {65, "bed", ""},
    {67, "dining table", "table"},
    {70, "toilet", ""},
    {72, "tv", "television|monitor"},
    {73, "laptop", "computer|notebook"},
    {74, "mouse", ""},
    {75, "remote", "controller"},
    {76, "keyboard", ""},
    {77, "cell phone", "phone|cellphone|smartphone"},
    {78, "microwave", ""},
    {79, "oven", "stove"},
    {80, "toaster", ""},
    {81, "sink", ""},
    {82, "refrigerator", "fridge"},
    {84, "book", ""},
    {85, "clock", ""},
    {86, "vase", ""},
    {87, "scissors", ""},
    {88, "teddy bear", "teddy"},
    {89, "hair drier", "hair dryer|dryer"},
    {90, "toothbrush", ""},
};

inline constexpr std::array<std::string_view, 81> kDefaultVague = {
    "a", "above", "an", "area", "at", "back", "behind", "beige",
    "below", "beside", "black", "blue", "bottom", "brown", "by", "center",
    "closest", "corner", "dark", "edge", "far", "fifth", "first", "fourth",
    "from", "front", "gold", "gray", "green", "grey", "half", "in",
    "is", "it", "item", "its", "last", "left", "leftmost", "lower",
    "maroon", "middle", "navy", "near", "nearest", "next", "object", "of",
    "on", "one", "ones", "orange", "part", "piece", "pink", "purple",
    "red", "right", "rightmost", "second", "side", "silver", "spot", "stuff",
    "tan", "teal", "that", "the", "these", "thing", "things", "third",
    "this", "those", "to", "top", "under", "upper", "white", "with",
    "yellow",
};

inline constexpr std::array<std::string_view, 20> kDefaultColors = {
    "white", "black", "red", "blue", "green", "yellow", "brown", "gray",
    "grey", "pink", "purple", "orange", "tan", "beige", "silver", "gold",
    "navy", "maroon", "teal", "dark",
};

inline constexpr std::array<std::string_view, 22> kDefaultPositions = {
    "left", "right", "top", "bottom", "middle", "center", "front", "back",
    "upper", "lower", "leftmost", "rightmost", "far", "near", "closest", "nearest",
    "behind", "above", "below", "next", "beside", "under",
};

inline constexpr std::array<std::string_view, 1183> kDefaultNouns = {
    "accordion", "acorn", "actor", "adult", "airport", "aisle", "alley", "altar",
    "ambulance", "anchor", "animal", "animals", "antenna", "antler", "apartment", "appliance",
    "apron", "arch", "archway", "arm", "armchair", "armor", "arms", "arrow",
    "artist", "ashtray", "athlete", "attic", "audience", "avenue", "avocado", "awning",
    "axe", "backdrop", "backyard", "badge", "bag", "bagel", "baggage", "bakery",
    "balcony", "bale", "ballerina", "balloon", "balloons", "bamboo", "bandage", "bandana",
    "banister", "bank", "banner", "bar", "barbecue", "barn", "barrel", "barrier",
    "base", "baseball", "basement", "basin", "basket", "basketball", "bath", "bathrobe",
    "bathroom", "bathtub", "battery", "bay", "beach", "beam", "bean", "beanie",
    "beans", "beard", "bears", "bedroom", "bedspread", "bee", "beef", "beer",
    "beetle", "bell", "belt", "berries", "berry", "biker", "bikini", "billboard",
    "bin", "binder", "birds", "biscuit", "blade", "blanket", "blazer", "bleachers",
    "blender", "blind", "block", "blossom", "blouse", "blueberry", "board", "boardwalk",
    "body", "bookcase", "bookshelf", "boot", "booth", "boots", "boulder", "boulevard",
    "bouquet", "bow", "box", "boxer", "bracelet", "braid", "branch", "bread",
    "breakfast", "brick", "bricks", "bride", "bridge", "brownie", "brush", "bubble",
    "bucket", "bud", "buffalo", "building", "bulb", "bulldozer", "bumper", "bun",
    "bunch", "bundle", "bunk", "burrito", "bush", "bushel", "bushes", "butter",
    "butterfly", "button", "buttons", "cabbage", "cabin", "cabinet", "cable", "cactus",
    "cafe", "cage", "calendar", "calves", "camel", "camera", "can", "canal",
    "candle", "candy", "cannon", "canopy", "canvas", "cap", "cape", "caravan",
    "cardboard", "cardigan", "cargo", "carousel", "carpet", "carriage", "cart", "carton",
    "case", "cashier", "casserole", "cast", "castle", "cathedral", "cats", "cauliflower",
    "cave", "ceiling", "celery", "cello", "chain", "chalk", "chalkboard", "champagne",
    "chandelier", "character", "charger", "cheek", "cheese", "cheesecake", "cherries", "cherry",
    "chess", "chest", "chicken", "chimney", "chin", "chip", "chips", "chocolate",
    "church", "cigar", "cigarette", "cinnamon", "circle", "city", "claw", "clay",
    "cleat", "clerk", "cliff", "clip", "cloak", "closet", "cloth", "clothes",
    "clothing", "cloud", "clouds", "coach", "coast", "coaster", "coat", "cobblestone",
    "cockatoo", "cockpit", "cocktail", "coconut", "coffee", "coin", "colander", "collar",
    "column", "comb", "comforter", "cone", "console", "container", "cook", "cookie",
    "cookies", "cooler", "cord", "corn", "costume", "cottage", "counter", "countertop",
    "court", "cover", "cowboy", "crab", "cracker", "crane", "crate", "crayon",
    "cream", "creature", "creek", "crib", "crocodile", "cross", "crossing", "crosswalk",
    "crow", "crowd", "crown", "cruise", "crust", "cub", "cube", "cucumber",
    "cupboard", "curb", "curtain", "curtains", "cushion", "customer", "cutlery", "cutting",
    "cylinder", "dam", "dancer", "dashboard", "daughter", "deck", "decoration", "deer",
    "den", "dentist", "desert", "desk", "dessert", "device", "diamond", "diner",
    "dinner", "dinosaur", "dirt", "dish", "dishwasher", "disk", "ditch", "dock",
    "dogs", "doll", "dolphin", "dome", "donkey", "door", "doorknob", "doormat",
    "doorway", "dot", "dots", "dough", "dragon", "drain", "drape", "drawer",
    "drawing", "dress", "dresser", "dressing", "drink", "driver", "driveway", "drum",
    "drummer", "duckling", "ducks", "dugout", "dumpling", "dumpster", "dust", "eagle",
    "ear", "earring", "ears", "easel", "easter", "egg", "eggplant", "eggs",
    "elbow", "electric", "elephants", "elevator", "embankment", "emblem", "employee", "engine",
    "entrance", "envelope", "equipment", "escalator", "exhibit", "eye", "eyebrow", "eyes",
    "fabric", "face", "factory", "fair", "family", "fan", "farm", "farmer",
    "faucet", "feather", "feet", "fence", "fern", "ferris", "ferry", "festival",
    "field", "fig", "figure", "figurine", "file", "finger", "fire", "fireman",
    "fireplace", "firetruck", "fish", "fisherman", "fist", "flag", "flags", "flame",
    "flamingo", "flashlight", "fleet", "flip", "flipper", "floor", "flower", "flowers",
    "flute", "foal", "fog", "folder", "foliage", "food", "foot", "football",
    "forehead", "forest", "fountain", "fox", "frame", "freezer", "friend", "fries",
    "frog", "frost", "frosting", "fruit", "fruits", "fryer", "fur", "furniture",
    "gallery", "game", "garage", "garden", "gate", "gazebo", "gear", "ghost",
    "gift", "giraffes", "girlfriend", "glacier", "glasses", "globe", "gloves", "goalie",
    "goalpost", "goat", "goats", "goggles", "gondola", "gorilla", "gown", "grandma",
    "grandpa", "granite", "grape", "grapes", "grass", "gravel", "greenery", "grill",
    "grocery", "groom", "ground", "guard", "guitar", "guitarist", "gun", "gutter",
    "gym", "hair", "hallway", "ham", "hamburger", "hammer", "hammock", "hamster",
    "hand", "handle", "handrail", "hands", "hanger", "harbor", "hat", "hawk",
    "hay", "head", "headband", "headboard", "headlight", "headphones", "heart", "hedge",
    "helicopter", "helmet", "hen", "herb", "highway", "hiker", "hill", "hillside",
    "hippo", "hockey", "hole", "honey", "hood", "hoodie", "hook", "hoop",
    "horn", "horseback", "horses", "hose", "hospital", "hotel", "hound", "house",
    "hull", "hut", "ice", "icing", "igloo", "infant", "insect", "instrument",
    "ipad", "iron", "island", "ivy", "jacket", "jaguar", "jar", "jeans",
    "jelly", "jellyfish", "jersey", "jewelry", "jockey", "jug", "juice", "kangaroo",
    "ketchup", "kettle", "key", "keyhole", "keys", "kiosk", "kitchen", "knee",
    "kneepad", "knob", "koala", "label", "lace", "ladder", "ladle", "lake",
    "lamp", "lamppost", "landscape", "lane", "lantern", "lap", "lawn", "leaf",
    "leash", "leaves", "ledge", "leg", "legs", "lemon", "lemonade", "lens",
    "leopard", "letter", "letters", "lettuce", "lever", "librarian", "license", "lid",
    "lifeguard", "light", "lighthouse", "lights", "lily", "limb", "lime", "line",
    "lines", "lion", "lizard", "lobster", "locker", "log", "logo", "logs",
    "lollipop", "lot", "lounge", "lunch", "machine", "magazine", "mailbox", "mall",
    "mane", "mango", "mannequin", "mantle", "map", "marina", "marker", "market",
    "mascot", "mask", "mast", "mat", "mattress", "mayonnaise", "meadow", "meal",
    "meat", "meatball", "medal", "melon", "menu", "merchandise", "mesh", "metal",
    "microphone", "midfield", "milk", "milkshake", "mirror", "mixer", "monkey", "monument",
    "moon", "moose", "mosque", "moss", "motel", "motor", "motorist", "mound",
    "mountain", "mouth", "mud", "muffin", "mural", "museum", "mushroom", "mushrooms",
    "musician", "mustache", "mustard", "nail", "napkin", "neck", "necklace", "needle",
    "neighborhood", "nephew", "nest", "net", "newspaper", "nightgown", "nightstand", "noodle",
    "noodles", "nose", "number", "nurse", "nut", "oar", "oatmeal", "ocean",
    "office", "oil", "omelet", "onion", "onions", "orchard", "ornament", "ostrich",
    "otter", "outfield", "outfit", "outlet", "overpass", "owl", "ox", "oyster",
    "pad", "paddle", "page", "pail", "paint", "painting", "pajamas", "pallet",
    "palm", "pan", "pancake", "panda", "panel", "pantry", "pants", "paper",
    "parachute", "parade", "park", "passenger", "pasta", "pastry", "pasture", "path",
    "patio", "pattern", "pavement", "pea", "peach", "peaches", "peacock", "peanut",
    "pear", "pebble", "pedal", "pedestrian", "pelican", "pen", "pencil", "penguin",
    "pepper", "pepperoni", "peppers", "performer", "pet", "pharmacy", "photo", "photograph",
    "photographer", "piano", "pickle", "picture", "pie", "pier", "pig", "pigs",
    "pile", "pillar", "pillow", "pillows", "pilot", "pin", "pine", "pineapple",
    "pipe", "pitch", "pitchfork", "plank", "planter", "plastic", "plate", "plateau",
    "platform", "playground", "plaza", "pliers", "plum", "pocket", "pocketbook", "polar",
    "pole", "police", "pond", "poodle", "pool", "popcorn", "porch", "porcupine",
    "pork", "portrait", "post", "postcard", "poster", "pot", "potato", "potatoes",
    "pottery", "pouch", "powder", "pretzel", "priest", "printer", "produce", "propeller",
    "pudding", "puddle", "pump", "pumpkin", "puppet", "puzzle", "quarterback", "quilt",
    "rabbit", "raccoon", "racer", "rack", "radiator", "radio", "radish", "raft",
    "rail", "railing", "rain", "rainbow", "raisin", "rake", "ramp", "ranch",
    "raspberry", "rat", "raven", "razor", "receipt", "referee", "reindeer", "reptile",
    "restaurant", "rhino", "ribbon", "rice", "rider", "rim", "ring", "ripple",
    "river", "road", "roadway", "roast", "robe", "robot", "rock", "rocket",
    "rocks", "rod", "roll", "roof", "rooftop", "room", "rooster", "rope",
    "rose", "rubber", "rug", "runner", "runway", "saddle", "sail", "sailor",
    "salad", "salmon", "salsa", "sand", "sandals", "sauce", "saucer", "sausage",
    "saxophone", "scale", "scarecrow", "scarf", "scene", "scholar", "school", "scientist",
    "scoop", "scoreboard", "scrambled", "screen", "screw", "sculpture", "sea", "seafood",
    "seal", "seaweed", "shade", "shadow", "shark", "shed", "sheeps", "sheet",
    "shelf", "shell", "shepherd", "sheriff", "shirt", "shoe", "shoes", "shop",
    "shopper", "shore", "shorts", "shoulder", "shower", "shrimp", "shrub", "shutter",
    "sibling", "sidewalk", "sign", "silhouette", "singer", "sister", "skate", "skeleton",
    "skirt", "skull", "sky", "skyline", "skyscraper", "sled", "sleeve", "slice",
    "slices", "slide", "slipper", "slope", "smoke", "smoothie", "snack", "snail",
    "snake", "sneakers", "snow", "soap", "soccer", "sock", "socket", "socks",
    "soda", "soil", "soldier", "son", "soup", "spaghetti", "sparrow", "spatula",
    "speaker", "speakers", "spectator", "spice", "spider", "spinach", "sponge", "spray",
    "squash", "squirrel", "stack", "stadium", "stage", "staircase", "stairs", "stairway",
    "stall", "stallion", "stamp", "stand", "stands", "starfish", "station", "statue",
    "steak", "steam", "steeple", "stem", "step", "steps", "stew", "stick",
    "sticker", "sticks", "stirrup", "stocking", "stomach", "stone", "store", "storefront",
    "strap", "straw", "strawberries", "strawberry", "stream", "street", "streetlight", "string",
    "stripe", "stripes", "stroller", "structure", "student", "stump", "submarine", "suburb",
    "subway", "sugar", "suit", "sun", "sundae", "sunflower", "sunglasses", "sunlight",
    "supermarket", "surface", "sushi", "swan", "sweater", "sweatshirt", "swimmer", "swing",
    "switch", "sword", "syrup", "table", "tablecloth", "tablet", "taco", "tag",
    "tail", "tangerine", "tank", "tape", "target", "tassel", "tattoo", "tea",
    "teacher", "team", "teammate", "teapot", "teenager", "telephone", "temple", "tennis",
    "tent", "terrace", "terrier", "text", "theater", "thread", "thumb", "tiara",
    "ticket", "tiger", "tile", "tiles", "tin", "tip", "tire", "tires",
    "toast", "tomato", "tomatoes", "tool", "tools", "toothpaste", "torch", "tortilla",
    "tortoise", "tourist", "towel", "tower", "townhouse", "toy", "toys", "track",
    "tracks", "tractor", "trader", "trail", "trailer", "trash", "trashcan", "traveler",
    "tray", "tree", "trees", "trolley", "trophy", "trout", "trumpet", "trunk",
    "tshirt", "tub", "tube", "tulip", "tunnel", "turf", "turkey", "turtle",
    "tutu", "tuxedo", "twin", "typewriter", "uncle", "uniform", "utensil", "vacuum",
    "valley", "vegetable", "vegetables", "vehicle", "vehicles", "vendor", "vent", "veranda",
    "vest", "veterinarian", "viewer", "village", "vine", "vineyard", "violin", "visor",
    "volleyball", "waffle", "wagon", "waiter", "waitress", "walkway", "wall", "wallpaper",
    "walrus", "wand", "wardrobe", "warehouse", "washer", "watch", "water", "waterfall",
    "watermelon", "wave", "waves", "weed", "wetsuit", "whale", "wheat", "wheel",
    "wheelbarrow", "wheelchair", "wheels", "whip", "whisk", "whiskers", "wig", "windmill",
    "window", "windows", "windshield", "wing", "wings", "wire", "wolf", "wood",
    "woods", "word", "words", "worker", "wrapper", "wreath", "wrist", "yacht",
    "yard", "yarn", "yogurt", "zebras", "zipper", "zoo", "zucchini",
};

}  // namespace rris::detail
