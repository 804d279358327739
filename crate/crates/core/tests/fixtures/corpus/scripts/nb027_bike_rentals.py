import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')
from sklearn.model_selection import train_test_split
from sklearn.ensemble import GradientBoostingRegressor
from sklearn.ensemble import RandomForestRegressor
from sklearn.preprocessing import MinMaxScaler
from sklearn.metrics import mean_absolute_error

df = pd.read_csv('data/bike_rentals.csv')

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='temp', data=df)
plt.xticks(rotation=45)
plt.show()

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

num_cols = [c for c in df.columns if df[c].dtype != 'object']
print(num_cols)

for col in df.columns:
    print(col, df[col].nunique())

print(df.shape)
df.head()
df.info()
df.describe()

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

sns.pairplot(df.sample(100))
plt.show()

print(df['temp'].describe())
print(df['temp'].skew())
sns.histplot(df['temp'], kde=True)
plt.show()

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

df = df.dropna(subset=['target'])
df['season'] = df['season'].fillna(df['season'].mode()[0])
df['weather'] = df['weather'].fillna(df['weather'].mode()[0])
df['temp'] = df['temp'].fillna(df['temp'].median())
df['humidity'] = df['humidity'].fillna(df['humidity'].median())
df['windspeed'] = df['windspeed'].fillna(df['windspeed'].median())

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.25, random_state=64)
print(X_train.shape, X_test.shape)

prep0 = MinMaxScaler()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)

model = RandomForestRegressor()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print('mae', mean_absolute_error(y_test, preds))

model1 = GradientBoostingRegressor()
model1.fit(X_train, y_train)
preds = model1.predict(X_test)
print('mae', mean_absolute_error(y_test, preds))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
