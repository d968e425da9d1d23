"""Hand-curated place table behind the recorded geocoder fixtures.

Every entry becomes one Nominatim-shaped result. Cities carry the full
country/state/county/city address; state and country entries stop at their
own level, the way the real service answers such queries.
"""

# key: (name, county, state, country, cc, lat, lon, importance)
CITIES = {
    "london": ("London", "Greater London", "England", "United Kingdom", "gb", 51.5074, -0.1278, 0.93),
    "manchester": ("Manchester", "Greater Manchester", "England", "United Kingdom", "gb", 53.4808, -2.2426, 0.78),
    "birmingham": ("Birmingham", "West Midlands", "England", "United Kingdom", "gb", 52.4862, -1.8904, 0.76),
    "york": ("York", "North Yorkshire", "England", "United Kingdom", "gb", 53.96, -1.0873, 0.7),
    "edinburgh": ("Edinburgh", "City of Edinburgh", "Scotland", "United Kingdom", "gb", 55.9533, -3.1883, 0.8),
    "paris": ("Paris", "Paris", "Île-de-France", "France", "fr", 48.8566, 2.3522, 0.96),
    "lyon": ("Lyon", "Métropole de Lyon", "Auvergne-Rhône-Alpes", "France", "fr", 45.764, 4.8357, 0.78),
    "new york": ("New York", "New York County", "New York", "United States", "us", 40.7128, -74.006, 0.95),
    "los angeles": ("Los Angeles", "Los Angeles County", "California", "United States", "us", 34.0522, -118.2437, 0.9),
    "san francisco": ("San Francisco", "San Francisco County", "California", "United States", "us", 37.7749, -122.4194, 0.88),
    "washington": ("Washington", "District of Columbia", "District of Columbia", "United States", "us", 38.9072, -77.0369, 0.92),
    "chicago": ("Chicago", "Cook County", "Illinois", "United States", "us", 41.8781, -87.6298, 0.88),
    "houston": ("Houston", "Harris County", "Texas", "United States", "us", 29.7604, -95.3698, 0.85),
    "austin": ("Austin", "Travis County", "Texas", "United States", "us", 30.2672, -97.7431, 0.8),
    "dallas": ("Dallas", "Dallas County", "Texas", "United States", "us", 32.7767, -96.797, 0.82),
    "seattle": ("Seattle", "King County", "Washington", "United States", "us", 47.6062, -122.3321, 0.84),
    "boston": ("Boston", "Suffolk County", "Massachusetts", "United States", "us", 42.3601, -71.0589, 0.85),
    "miami": ("Miami", "Miami-Dade County", "Florida", "United States", "us", 25.7617, -80.1918, 0.83),
    "atlanta": ("Atlanta", "Fulton County", "Georgia", "United States", "us", 33.749, -84.388, 0.82),
    "toronto": ("Toronto", "Toronto", "Ontario", "Canada", "ca", 43.6532, -79.3832, 0.87),
    "vancouver": ("Vancouver", "Metro Vancouver", "British Columbia", "Canada", "ca", 49.2827, -123.1207, 0.83),
    "mexico city": ("Mexico City", "Cuauhtémoc", "Mexico City", "Mexico", "mx", 19.4326, -99.1332, 0.88),
    "madrid": ("Madrid", "Madrid", "Community of Madrid", "Spain", "es", 40.4168, -3.7038, 0.9),
    "barcelona": ("Barcelona", "Barcelonès", "Catalonia", "Spain", "es", 41.3874, 2.1686, 0.88),
    "rome": ("Rome", "Roma Capitale", "Lazio", "Italy", "it", 41.9028, 12.4964, 0.91),
    "milan": ("Milan", "Milano", "Lombardy", "Italy", "it", 45.4642, 9.19, 0.86),
    "berlin": ("Berlin", "Berlin", "Berlin", "Germany", "de", 52.52, 13.405, 0.91),
    "munich": ("Munich", "Munich", "Bavaria", "Germany", "de", 48.1351, 11.582, 0.84),
    "amsterdam": ("Amsterdam", "Amsterdam", "North Holland", "Netherlands", "nl", 52.3676, 4.9041, 0.87),
    "brussels": ("Brussels", "Brussels-Capital", "Brussels-Capital", "Belgium", "be", 50.8503, 4.3517, 0.85),
    "lisbon": ("Lisbon", "Lisbon", "Lisbon", "Portugal", "pt", 38.7223, -9.1393, 0.84),
    "dublin": ("Dublin", "County Dublin", "Leinster", "Ireland", "ie", 53.3498, -6.2603, 0.85),
    "vienna": ("Vienna", "Vienna", "Vienna", "Austria", "at", 48.2082, 16.3738, 0.85),
    "moscow": ("Moscow", "Central Administrative Okrug", "Moscow", "Russia", "ru", 55.7558, 37.6173, 0.88),
    "istanbul": ("Istanbul", "Fatih", "Istanbul", "Turkey", "tr", 41.0082, 28.9784, 0.86),
    "cairo": ("Cairo", "Cairo", "Cairo Governorate", "Egypt", "eg", 30.0444, 31.2357, 0.85),
    "lagos": ("Lagos", "Lagos Island", "Lagos State", "Nigeria", "ng", 6.5244, 3.3792, 0.83),
    "abuja": ("Abuja", "Abuja Municipal", "Federal Capital Territory", "Nigeria", "ng", 9.0765, 7.3986, 0.78),
    "nairobi": ("Nairobi", "Nairobi", "Nairobi County", "Kenya", "ke", -1.2921, 36.8219, 0.82),
    "johannesburg": ("Johannesburg", "City of Johannesburg", "Gauteng", "South Africa", "za", -26.2041, 28.0473, 0.82),
    "cape town": ("Cape Town", "City of Cape Town", "Western Cape", "South Africa", "za", -33.9249, 18.4241, 0.82),
    "mumbai": ("Mumbai", "Mumbai Suburban", "Maharashtra", "India", "in", 19.076, 72.8777, 0.87),
    "new delhi": ("New Delhi", "New Delhi", "Delhi", "India", "in", 28.6139, 77.209, 0.86),
    "bengaluru": ("Bengaluru", "Bangalore Urban", "Karnataka", "India", "in", 12.9716, 77.5946, 0.83),
    "karachi": ("Karachi", "Karachi Division", "Sindh", "Pakistan", "pk", 24.8607, 67.0011, 0.82),
    "lahore": ("Lahore", "Lahore District", "Punjab", "Pakistan", "pk", 31.5204, 74.3587, 0.8),
    "dhaka": ("Dhaka", "Dhaka District", "Dhaka Division", "Bangladesh", "bd", 23.8103, 90.4125, 0.82),
    "wuhan": ("Wuhan", "Jiang'an District", "Hubei", "China", "cn", 30.5928, 114.3055, 0.84),
    "beijing": ("Beijing", "Dongcheng District", "Beijing", "China", "cn", 39.9042, 116.4074, 0.88),
    "tokyo": ("Tokyo", "Chiyoda", "Tokyo", "Japan", "jp", 35.6762, 139.6503, 0.9),
    "seoul": ("Seoul", "Jung-gu", "Seoul", "South Korea", "kr", 37.5665, 126.978, 0.86),
    "manila": ("Manila", "Capital District", "Metro Manila", "Philippines", "ph", 14.5995, 120.9842, 0.83),
    "jakarta": ("Jakarta", "Central Jakarta", "Jakarta", "Indonesia", "id", -6.2088, 106.8456, 0.84),
    "sydney": ("Sydney", "Council of the City of Sydney", "New South Wales", "Australia", "au", -33.8688, 151.2093, 0.88),
    "melbourne": ("Melbourne", "City of Melbourne", "Victoria", "Australia", "au", -37.8136, 144.9631, 0.85),
    "sao paulo": ("São Paulo", "São Paulo", "São Paulo", "Brazil", "br", -23.5505, -46.6333, 0.87),
    "buenos aires": ("Buenos Aires", "Comuna 1", "Autonomous City of Buenos Aires", "Argentina", "ar", -34.6037, -58.3816, 0.86),
    "lima": ("Lima", "Lima", "Lima Metropolitan Area", "Peru", "pe", -12.0464, -77.0428, 0.83),
    "bogota": ("Bogotá", "Bogotá", "Bogotá Capital District", "Colombia", "co", 4.711, -74.0721, 0.84),
    "riyadh": ("Riyadh", "Riyadh", "Riyadh Region", "Saudi Arabia", "sa", 24.7136, 46.6753, 0.83),
    "dubai": ("Dubai", "Dubai", "Dubai", "United Arab Emirates", "ae", 25.2048, 55.2708, 0.85),
    # Second-ranked namesakes and joke locations.
    "paris tx": ("Paris", "Lamar County", "Texas", "United States", "us", 33.6609, -95.5555, 0.55),
    "london on": ("London", "Middlesex County", "Ontario", "Canada", "ca", 42.9849, -81.2453, 0.6),
    "birmingham al": ("Birmingham", "Jefferson County", "Alabama", "United States", "us", 33.5186, -86.8104, 0.62),
    "mars fr": ("Mars", "Loire", "Auvergne-Rhône-Alpes", "France", "fr", 46.1, 4.35, 0.32),
    "earth tx": ("Earth", "Lamb County", "Texas", "United States", "us", 34.2331, -102.4107, 0.35),
    "home ks": ("Home", "Marshall County", "Kansas", "United States", "us", 39.84, -96.52, 0.25),
    "victoria ca": ("Victoria", "Capital Regional District", "British Columbia", "Canada", "ca", 48.4284, -123.3656, 0.72),
}

# key: (state, country, cc, lat, lon, importance)
STATES = {
    "texas": ("Texas", "United States", "us", 31.2639, -98.5456, 0.86),
    "california": ("California", "United States", "us", 36.7783, -119.4179, 0.88),
    "florida": ("Florida", "United States", "us", 27.7568, -81.4640, 0.84),
    "ontario": ("Ontario", "Canada", "ca", 50.0007, -86.0008, 0.8),
    "england": ("England", "United Kingdom", "gb", 52.5311, -1.2649, 0.88),
    "scotland": ("Scotland", "United Kingdom", "gb", 56.7861, -4.1140, 0.85),
    "bavaria": ("Bavaria", "Germany", "de", 48.9468, 11.4039, 0.78),
    "lombardy": ("Lombardy", "Italy", "it", 45.5856, 9.9300, 0.77),
    "maharashtra": ("Maharashtra", "India", "in", 19.5319, 76.0554, 0.79),
    "hubei": ("Hubei", "China", "cn", 31.0, 112.0, 0.74),
    "victoria": ("Victoria", "Australia", "au", -36.5986, 144.6780, 0.82),
}

# key: (country, cc, lat, lon, importance)
COUNTRIES = {
    "united states": ("United States", "us", 39.7837, -100.4459, 0.97),
    "united kingdom": ("United Kingdom", "gb", 54.7024, -3.2766, 0.95),
    "france": ("France", "fr", 46.6034, 1.8883, 0.96),
    "spain": ("Spain", "es", 39.3261, -4.8380, 0.94),
    "italy": ("Italy", "it", 42.6384, 12.6743, 0.95),
    "germany": ("Germany", "de", 51.1639, 10.4478, 0.95),
    "india": ("India", "in", 22.3511, 78.6677, 0.94),
    "china": ("China", "cn", 35.0001, 104.9999, 0.94),
    "nigeria": ("Nigeria", "ng", 9.6000, 7.9999, 0.89),
    "kenya": ("Kenya", "ke", 1.4419, 38.4314, 0.87),
    "canada": ("Canada", "ca", 61.0666, -107.9917, 0.93),
    "australia": ("Australia", "au", -24.7761, 134.7550, 0.93),
    "brazil": ("Brazil", "br", -10.3333, -53.2000, 0.93),
    "mexico": ("Mexico", "mx", 23.6585, -102.0077, 0.92),
    "japan": ("Japan", "jp", 36.5748, 139.2394, 0.93),
    "pakistan": ("Pakistan", "pk", 30.3308, 71.2475, 0.89),
    "south africa": ("South Africa", "za", -28.8167, 24.9916, 0.89),
    "ireland": ("Ireland", "ie", 52.8652, -7.9795, 0.88),
    "philippines": ("Philippines", "ph", 12.7503, 122.7312, 0.88),
}

# Search query -> ranked result keys. Queries are already normalized.
SEARCH = {
    "london": ["london", "london on"],
    "manchester": ["manchester"],
    "birmingham": ["birmingham", "birmingham al"],
    "york": ["york"],
    "edinburgh": ["edinburgh"],
    "paris": ["paris", "paris tx"],
    "lyon": ["lyon"],
    "new york": ["new york"],
    "manhattan": ["new york"],
    "los angeles": ["los angeles"],
    "angeles": [],
    "san francisco": ["san francisco"],
    "washington": ["washington"],
    "chicago": ["chicago"],
    "houston": ["houston"],
    "austin": ["austin"],
    "dallas": ["dallas"],
    "seattle": ["seattle"],
    "boston": ["boston"],
    "miami": ["miami"],
    "atlanta": ["atlanta"],
    "toronto": ["toronto"],
    "vancouver": ["vancouver"],
    "mexico city": ["mexico city"],
    "madrid": ["madrid"],
    "barcelona": ["barcelona"],
    "rome": ["rome"],
    "milan": ["milan"],
    "berlin": ["berlin"],
    "munich": ["munich"],
    "amsterdam": ["amsterdam"],
    "brussels": ["brussels"],
    "lisbon": ["lisbon"],
    "dublin": ["dublin"],
    "vienna": ["vienna"],
    "moscow": ["moscow"],
    "istanbul": ["istanbul"],
    "cairo": ["cairo"],
    "lagos": ["lagos"],
    "abuja": ["abuja"],
    "nairobi": ["nairobi"],
    "johannesburg": ["johannesburg"],
    "cape town": ["cape town"],
    "mumbai": ["mumbai"],
    "delhi": ["new delhi"],
    "new delhi": ["new delhi"],
    "bengaluru": ["bengaluru"],
    "bangalore": ["bengaluru"],
    "karachi": ["karachi"],
    "lahore": ["lahore"],
    "dhaka": ["dhaka"],
    "wuhan": ["wuhan"],
    "beijing": ["beijing"],
    "tokyo": ["tokyo"],
    "seoul": ["seoul"],
    "manila": ["manila"],
    "jakarta": ["jakarta"],
    "sydney": ["sydney"],
    "melbourne": ["melbourne"],
    "sao paulo": ["sao paulo"],
    "são paulo": ["sao paulo"],
    "buenos aires": ["buenos aires"],
    "lima": ["lima"],
    "bogota": ["bogota"],
    "bogotá": ["bogota"],
    "riyadh": ["riyadh"],
    "dubai": ["dubai"],
    "mars": ["mars fr"],
    "earth": ["earth tx"],
    "home": ["home ks"],
    "texas": ["texas"],
    "california": ["california"],
    "florida": ["florida"],
    "ontario": ["ontario"],
    "england": ["england"],
    "scotland": ["scotland"],
    "bavaria": ["bavaria"],
    "lombardy": ["lombardy"],
    "maharashtra": ["maharashtra"],
    "hubei": ["hubei"],
    "victoria": ["victoria", "victoria ca"],
    "usa": ["united states"],
    "america": ["united states"],
    "united states": ["united states"],
    "uk": ["united kingdom"],
    "britain": ["united kingdom"],
    "united kingdom": ["united kingdom"],
    "france": ["france"],
    "spain": ["spain"],
    "italy": ["italy"],
    "germany": ["germany"],
    "india": ["india"],
    "china": ["china"],
    "nigeria": ["nigeria"],
    "kenya": ["kenya"],
    "canada": ["canada"],
    "australia": ["australia"],
    "brazil": ["brazil"],
    "mexico": ["mexico"],
    "japan": ["japan"],
    "pakistan": ["pakistan"],
    "south africa": ["south africa"],
    "ireland": ["ireland"],
    "philippines": ["philippines"],
}

# Real towns named after countries, states and other places; the index only
# needs their names. (cc, name, region, lat, lon)
EXTRA_TOWNS = [
    ("us", "Texas", "MD", 39.4637, -76.6455),
    ("us", "Florida", "NY", 41.3317, -74.3568),
    ("us", "Ontario", "CA", 34.0633, -117.6509),
    ("us", "England", "AR", 34.5443, -91.969),
    ("us", "Scotland", "SD", 43.1489, -97.7189),
    ("us", "Bavaria", "KS", 38.7961, -97.7573),
    ("us", "Mexico", "ME", 44.5606, -70.5459),
    ("us", "Italy", "TX", 32.184, -96.8847),
    ("us", "China", "TX", 30.053, -94.3355),
    ("us", "Canada", "KY", 37.6017, -82.3262),
    ("us", "Brazil", "IN", 39.5237, -87.125),
    ("us", "Manhattan", "KS", 39.1836, -96.5717),
    ("us", "Delhi", "NY", 42.2781, -74.916),
    ("us", "Mars", "PA", 40.6959, -80.0117),
    ("us", "Home", "PA", 40.7484, -79.1003),
    ("ph", "Angeles", "D3", 15.145, 120.5887),
    ("in", "Bangalore", "19", 12.9716, 77.5946),
]
