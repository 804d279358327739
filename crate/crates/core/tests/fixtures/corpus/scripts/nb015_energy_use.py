import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
from sklearn.model_selection import train_test_split
from lightgbm import LGBMRegressor
from sklearn.preprocessing import PowerTransformer
from sklearn.metrics import mean_squared_error

df = pd.read_csv('/kaggle/input/energy_use.csv')

df.tail()
df.columns
print(len(df))

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

cat_cols = df.select_dtypes(include='object').columns
for c in cat_cols:
    print(df[c].value_counts().head())

fig, ax = plt.subplots(1, 2, figsize=(14, 5))
df['surface'].plot(kind='hist', ax=ax[0])
df.boxplot(column='surface', ax=ax[1])
plt.show()

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='surface', data=df)
plt.xticks(rotation=45)
plt.show()

for col in df.columns:
    print(col, df[col].nunique())

df.isnull().sum()
print(df.dtypes)
df.nunique()

print(df.shape)
df.head()
df.info()
df.describe()

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

df = df.dropna(subset=['target'])
df['orientation'] = df['orientation'].fillna(df['orientation'].mode()[0])
df['surface'] = df['surface'].fillna(df['surface'].median())
df['wall_area'] = df['wall_area'].fillna(df['wall_area'].median())
df['roof_area'] = df['roof_area'].fillna(df['roof_area'].median())

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.3, random_state=38)
print(X_train.shape, X_test.shape)

prep0 = PowerTransformer()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)

model = LGBMRegressor()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print('rmse', np.sqrt(mean_squared_error(y_test, preds)))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
